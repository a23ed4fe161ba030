"""Standalone adversarial-example oracle process.

Loads a model document, then answers distance-ball robustness checks
over a line-delimited JSON protocol on stdin/stdout. The default answer
engine is an exhaustive scan of the declared feature domains; a custom
search hook can wrap a real verifier instead.
"""

from .model import BadDocument, Domain, Model, parse_document
from .search import CANCELLED, SearchUnsupported, distance, grid_search, within
from .server import OracleServer, ProtocolError, Session, build_session, main, resolve_hook

__version__ = "0.1.0"
