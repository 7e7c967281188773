"""govtree: a governed directive interpreter.

Pure programs emit directives; they never perform effects. The
governance operator wraps every directive's handling in a seven-stage
pipeline (four gating checks, the effect, three recording checks), and
a fuel-bounded checker can refute — or fail to refute — the safety of
any interpretation. Around that core: a tamper-evident provenance
chain, a register-machine compiler demonstrating completeness under
governance, an alternating-normal-form rewriter, and a differential
fuzz harness pitting the interpreter against an independent reference.
"""

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
