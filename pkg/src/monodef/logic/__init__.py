"""First-order logic over partial orders: formulas, evaluation, definability."""

from __future__ import annotations

from .definability import (DefinitionCertificate, build_decoder_formula, certify, check_monotone,
                           claim1_holds, claim2_holds, finite_relation_formula, graph_transform, lower_fringe,
                           synthesize_monotone_definition, upper_graph)
from .evaluate import evaluate, evaluate_naive, extension, extension_naive
from .formula import parse, to_sexpr

__all__ = [
    "DefinitionCertificate",
    "build_decoder_formula",
    "certify",
    "check_monotone",
    "claim1_holds",
    "claim2_holds",
    "evaluate",
    "evaluate_naive",
    "extension",
    "extension_naive",
    "finite_relation_formula",
    "graph_transform",
    "lower_fringe",
    "parse",
    "synthesize_monotone_definition",
    "to_sexpr",
    "upper_graph",
]
