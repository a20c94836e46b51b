"""Offline embedding extraction: encoders in, interchange files out."""

from .encoders import (
    BagOfWordsTextEncoder,
    ProjectionImageEncoder,
    build_image_encoder,
    build_text_encoder,
    parse_encoder_spec,
)
from .formats import (
    write_class_names,
    write_embeddings,
    write_labels,
    write_manifest,
)
from .job import (
    ExtractionJob,
    extract_image_embeddings,
    extract_text_embeddings,
    read_image_list,
    write_dataset_manifest,
)
from .naming import (
    DEFAULT_ALIASES,
    build_prompts,
    load_aliases,
    normalize_class_name,
)

__version__ = "0.1.0"

__all__ = [
    "BagOfWordsTextEncoder",
    "DEFAULT_ALIASES",
    "ExtractionJob",
    "ProjectionImageEncoder",
    "build_image_encoder",
    "build_prompts",
    "build_text_encoder",
    "extract_image_embeddings",
    "extract_text_embeddings",
    "load_aliases",
    "normalize_class_name",
    "parse_encoder_spec",
    "read_image_list",
    "write_class_names",
    "write_dataset_manifest",
    "write_embeddings",
    "write_labels",
    "write_manifest",
]
