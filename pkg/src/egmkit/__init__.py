"""egmkit: build evidence gap maps from scholarly search to export.

The pipeline: parse a boolean query, search bibliographic providers,
deduplicate into a corpus, screen records, fit a keyword-assisted topic
model that suggests which studies belong to which framework topic, code
effect directions, and export the intervention x outcome gap matrix.
"""

from .dedupe import dedupe, merge_into_corpus, title_similarity
from .egm import (
    AxisItem,
    EffectCoding,
    EgmCell,
    EgmFilters,
    EgmMatrix,
    Framework,
    GapConfig,
    ScreeningDecision,
    StudyAttributes,
    Suggestion,
    build_egm,
    classify_cell,
    rank_suggestions,
)
from .errors import EgmkitError
from .estimator import CorpusVectorizer, KeywordTopicModel
from .exports import export_egm
from .importer import import_records, parse_csv, parse_jsonl
from .keyatm import (
    FitConfig,
    FitResult,
    HyperParams,
    KeywordSpec,
    build_model_export,
    estimate_phi,
    estimate_theta,
    fit,
)
from .project import Project, new_project
from .providers import ProviderConfig, fetch_provider_page, load_preset
from .query import eval_query, parse_query, render_provider_query
from .records import SearchFilters, StudyRecord, build_record, make_record_id
from .search import SearchRun, run_search
from .textprep import (
    TokenizedCorpus,
    Vocabulary,
    build_vocabulary,
    tokenize,
    validate_keywords,
    vectorize,
)

__version__ = "0.1.0"

__all__ = [
    "AxisItem",
    "CorpusVectorizer",
    "EffectCoding",
    "EgmCell",
    "EgmFilters",
    "EgmMatrix",
    "EgmkitError",
    "FitConfig",
    "FitResult",
    "Framework",
    "GapConfig",
    "HyperParams",
    "KeywordSpec",
    "KeywordTopicModel",
    "Project",
    "ProviderConfig",
    "ScreeningDecision",
    "SearchFilters",
    "SearchRun",
    "StudyAttributes",
    "StudyRecord",
    "Suggestion",
    "TokenizedCorpus",
    "Vocabulary",
    "build_egm",
    "build_model_export",
    "build_record",
    "build_vocabulary",
    "classify_cell",
    "dedupe",
    "estimate_phi",
    "estimate_theta",
    "eval_query",
    "export_egm",
    "fetch_provider_page",
    "fit",
    "import_records",
    "load_preset",
    "make_record_id",
    "merge_into_corpus",
    "new_project",
    "parse_csv",
    "parse_jsonl",
    "parse_query",
    "rank_suggestions",
    "render_provider_query",
    "run_search",
    "title_similarity",
    "tokenize",
    "validate_keywords",
    "vectorize",
]
