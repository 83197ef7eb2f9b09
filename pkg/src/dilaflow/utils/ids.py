import hashlib
import json


def content_id(payload, prefix: str = "") -> str:
    """Stable short id: sha1 over canonical JSON of ``payload``."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha1(blob.encode("utf-8")).hexdigest()[:12]
    return f"{prefix}{digest}"


def rounded(value: float, digits: int = 9) -> float:
    # Avoid "-0.0" changing the hash.
    return round(value, digits) + 0.0
