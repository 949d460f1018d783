"""
File Adapter - For local use
Reads and writes windowed sets and reports on disk
"""
import logging
import os
import sys

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.exceptions import GrammarError
from core.windowed import DOMAIN_N, WindowedSet, parse_set

logger = logging.getLogger(__name__)


def load_windowed_set(path: str, horizon: int = None, domain: str = DOMAIN_N) -> WindowedSet:
    """
    Load a windowed set

    Args:
        path: '.json' files hold the run-length form, anything else one integer per line
        horizon: window for the text form (default: largest member)
        domain: 'N' or 'Z' for the text form
    """
    if not os.path.exists(path):
        raise GrammarError(f"set file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if path.endswith(".json"):
        window = WindowedSet.from_json(text)
    else:
        window = WindowedSet.from_text(text, horizon, domain)
    logger.info("Loaded %s from %s (%d members)", window.domain, path, len(window))
    return window


def save_windowed_set(window: WindowedSet, path: str) -> None:
    write_text(window.to_json() + "\n" if path.endswith(".json") else window.to_text(), path)


def write_text(text: str, path: str) -> None:
    """Write text, creating the output directory if needed"""
    output_dir = os.path.dirname(path)
    if output_dir and not os.path.exists(output_dir):
        os.makedirs(output_dir)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info("Saved to: %s", path)


def resolve_set(text: str, horizon: int = None) -> WindowedSet:
    """Set grammar plus 'file:PATH'"""
    if text.startswith("file:"):
        window = load_windowed_set(text[len("file:"):], horizon)
        if horizon is not None and window.domain == DOMAIN_N and window.horizon > horizon:
            window = window.truncate(horizon)
        return window
    if horizon is None:
        raise GrammarError(f"set {text!r} needs --horizon")
    return parse_set(text, horizon)
