"""Corpus workbench for telegraphic German findings text.

Pipeline: segment, tag (lookup first, heuristics after), chart-parse with
set-valued agreement features, extract entity/value relations by tree
patterns, cluster co-occurrences, and turn the aggregates into reviewable
lexicon and ontology suggestions. Everything a run learns goes through a
human decision before the next run may use it.
"""

from .cooccurrence import Cluster, CoocMatrix, property_inventory, zigzag_closure
from .docmodel import Document, EmptyCorpus, Segment, load_corpus, segment_document
from .features import FeatureBundle
from .grammar import Grammar, load_grammar
from .parser import ChartParser, ParseNode, ParseResult
from .pipeline import ConfigError, PipelineConfig, RunResult, StageFailure, run_pipeline
from .relations import RelationTable, load_patterns, match_patterns
from .store import KnowledgeStore, Suggestion, SuggestionKind
from .tagging import Tagger, TextLexicon

__all__ = [
    "ChartParser",
    "Cluster",
    "ConfigError",
    "CoocMatrix",
    "Document",
    "EmptyCorpus",
    "FeatureBundle",
    "Grammar",
    "KnowledgeStore",
    "ParseNode",
    "ParseResult",
    "PipelineConfig",
    "RelationTable",
    "RunResult",
    "Segment",
    "StageFailure",
    "Suggestion",
    "SuggestionKind",
    "Tagger",
    "TextLexicon",
    "load_corpus",
    "load_grammar",
    "load_patterns",
    "match_patterns",
    "property_inventory",
    "run_pipeline",
    "segment_document",
    "zigzag_closure",
]
