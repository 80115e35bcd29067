"""Clinical note pre-annotation, review, and evaluation toolkit."""

from .corpus import (
    ClinicalNote,
    Corpus,
    SentenceSpan,
    build_corpus,
    corpus_stats,
    ingest_note,
    load_corpus,
    select_by_query,
    split_sentences,
    stratified_split,
)
from .ensemble import EnsembleConfig, ToolOutput, ensemble_merge, import_tool_output
from .evaluation import (
    EvalReport,
    NoteScore,
    aggregate,
    annotation_time,
    normalized_activity,
    note_level_score,
    sentence_level_score,
)
from .extractor import (
    AnnotationSet,
    Mention,
    NegationLexicon,
    annotate,
    detect_negation,
    load_negation_lexicon,
    tag,
)
from .lexicon import (
    DataElement,
    Lexicon,
    MatcherSet,
    compile_matchers,
    filter_by_prefix,
    load_default_lexicon,
    load_lexicon,
)
from .project import InteractionEvent, Project, run_preannotation
from .standoff import (
    StandoffDoc,
    StandoffEntity,
    doc_to_mentions,
    mentions_to_doc,
    parse_ann,
    serialize_ann,
)

__version__ = "0.1.0"
