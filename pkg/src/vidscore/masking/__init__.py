"""Text keyword masking (tf-idf) and seeded video-frame masking."""

from vidscore.masking.keywords import KeywordSet, TfidfConfig, extract_keywords, keywords_to_csv
from vidscore.masking.text import MaskTokenError, contains_keyword, mask_text
from vidscore.masking.tokens import tokenize, tokenize_with_spans
from vidscore.masking.video import (
    OcrOutputMissingError,
    OcrWord,
    apply_mask_plan,
    load_ocr_records,
    plan_video_mask,
)

__all__ = [
    "KeywordSet",
    "TfidfConfig",
    "extract_keywords",
    "keywords_to_csv",
    "MaskTokenError",
    "contains_keyword",
    "mask_text",
    "tokenize",
    "tokenize_with_spans",
    "OcrOutputMissingError",
    "OcrWord",
    "apply_mask_plan",
    "load_ocr_records",
    "plan_video_mask",
]
