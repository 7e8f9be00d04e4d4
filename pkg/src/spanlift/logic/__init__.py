"""The span-apRHL proof system: flavors, rules, checking and validation."""

from .checker import (Certificate, ProofFile, check_derivation, check_proof_file, load_proof,
                      proof_from_json, sha256_file)
from .flavors import DP, RDP, TCDP, ZCDP, Flavor, compose, grades_close, leq, unit
from .judgment import Derivation, Judgment, derivation_from_json, judgment_from_json
from .rules import RULES, Env, apply_rule, defaults_from_conclusion, rule_names
from .validate import check_witness_pair, diagonal, empirical_validate, flavor_spec

__all__ = [
    "Certificate", "ProofFile", "check_derivation", "check_proof_file", "load_proof",
    "proof_from_json", "sha256_file", "DP", "RDP", "TCDP", "ZCDP", "Flavor", "compose",
    "grades_close", "leq", "unit", "Derivation", "Judgment", "derivation_from_json",
    "judgment_from_json", "RULES", "Env", "apply_rule", "defaults_from_conclusion", "rule_names",
    "check_witness_pair", "diagonal", "empirical_validate", "flavor_spec",
]
