"""Scholarly metadata provider clients: config, pacing, page fetching.

Provider shapes vary wildly, so everything is driven by a per-provider
config file: where the record list lives in the payload, how fields map
onto StudyRecord, how booleans are rendered, and how paging works. API
keys are never stored in config, only the name of the environment
variable holding them.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Any, Callable

import requests

from .errors import AuthError, MalformedPayloadError, NetworkError, RateLimitedError
from .query import BooleanSyntax
from .records import SearchFilters, StudyRecord, build_record
from .errors import SchemaError


@dataclass
class Paging:
    page_param: str = "page"
    size_param: str = "pageSize"
    page_size: int = 25
    style: str = "page"  # "page" (1-based page number) or "offset"


@dataclass
class ProviderConfig:
    name: str
    base_url: str
    query_param: str = "q"
    auth_header_name: str | None = None
    api_key_env_var: str | None = None
    paging: Paging = field(default_factory=Paging)
    rate_limit: float = 5.0  # requests per second
    field_map: dict[str, str] = field(default_factory=dict)
    boolean_syntax: BooleanSyntax = field(default_factory=BooleanSyntax)
    filter_params: dict[str, str] = field(default_factory=dict)  # filter field -> query param
    total_path: str | None = None

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be > 0")
        if "title" not in self.field_map:
            raise ValueError(f"provider '{self.name}': field_map must cover at least 'title'")

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderConfig":
        paging = d.get("paging", {})
        if not isinstance(paging, Paging):
            paging = Paging(**paging)
        syntax = BooleanSyntax.from_dict(d["boolean_syntax"]) if "boolean_syntax" in d \
            else BooleanSyntax()
        return cls(
            name=d["name"],
            base_url=d["base_url"],
            query_param=d.get("query_param", "q"),
            auth_header_name=d.get("auth_header_name"),
            api_key_env_var=d.get("api_key_env_var"),
            paging=paging,
            rate_limit=d.get("rate_limit", 5.0),
            field_map=dict(d.get("field_map", {})),
            boolean_syntax=syntax,
            filter_params=dict(d.get("filter_params", {})),
            total_path=d.get("total_path"),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "base_url": self.base_url,
            "query_param": self.query_param,
            "auth_header_name": self.auth_header_name,
            "api_key_env_var": self.api_key_env_var,
            "paging": asdict(self.paging),
            "rate_limit": self.rate_limit,
            "field_map": dict(self.field_map),
            "boolean_syntax": self.boolean_syntax.to_dict(),
            "filter_params": dict(self.filter_params),
            "total_path": self.total_path,
        }

    @classmethod
    def from_file(cls, path: str) -> "ProviderConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def load_preset(name: str) -> ProviderConfig:
    """Bundled best-effort presets (no credentials): core, crossref,
    elsevier, springer."""
    text = resources.files("egmkit.data.providers").joinpath(f"{name}.json").read_text("utf-8")
    return ProviderConfig.from_dict(json.loads(text))


class RateLimiter:
    """Paces request starts at least 1/rate seconds apart. Thread-safe; the
    clock and sleep functions are injectable so pacing is testable without
    real waiting."""

    def __init__(self, rate: float,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be > 0")
        self.interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_at = 0.0

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            wait = self._next_at - now
            if wait > 0:
                self._sleep(wait)
                now = self._next_at
            self._next_at = max(now, self._next_at) + self.interval


_limiters: dict[str, RateLimiter] = {}
_limiters_lock = threading.Lock()


def limiter_for(provider: ProviderConfig) -> RateLimiter:
    with _limiters_lock:
        limiter = _limiters.get(provider.name)
        if limiter is None or abs(limiter.interval - 1.0 / provider.rate_limit) > 1e-12:
            limiter = RateLimiter(provider.rate_limit)
            _limiters[provider.name] = limiter
        return limiter


def resolve_path(payload: Any, path: str) -> Any:
    """Walk a dot-separated path; integer segments index into lists.
    Returns None when any step is missing."""
    node = payload
    if path in ("", "."):
        return node
    for segment in path.split("."):
        if isinstance(node, dict):
            if segment not in node:
                return None
            node = node[segment]
        elif isinstance(node, list):
            try:
                node = node[int(segment)]
            except (ValueError, IndexError):
                return None
        else:
            return None
    return node


def _coerce_authors(value: Any) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    names = []
    for item in value:
        if isinstance(item, str):
            names.append(item)
        elif isinstance(item, dict):
            name = item.get("name") or " ".join(
                str(item[k]) for k in ("given", "family") if item.get(k)
            )
            if name:
                names.append(name)
    return names


def _coerce_scalar(value: Any) -> Any:
    # Crossref-style payloads wrap scalars in single-element lists.
    if isinstance(value, list):
        return value[0] if value else None
    return value


def map_item(provider: ProviderConfig, item: dict) -> StudyRecord:
    """Apply field_map to one payload item. Missing optional fields default
    to empty; a missing title path is a malformed payload."""
    title_path = provider.field_map["title"]
    title = _coerce_scalar(resolve_path(item, title_path))
    if not isinstance(title, str) or not title.strip():
        raise MalformedPayloadError(
            f"provider '{provider.name}': payload item lacks title at path '{title_path}'"
        )
    fields: dict[str, Any] = {"title": title}
    for target in ("doi", "abstract", "year", "venue", "url"):
        path = provider.field_map.get(target)
        if path:
            fields[target] = _coerce_scalar(resolve_path(item, path))
    authors_path = provider.field_map.get("authors")
    if authors_path:
        fields["authors"] = _coerce_authors(resolve_path(item, authors_path))
    try:
        record = build_record(fields, source=provider.name,
                              raw_payload=json.dumps(item, sort_keys=True))
    except SchemaError as exc:
        raise MalformedPayloadError(f"provider '{provider.name}': {exc}") from exc
    return record


def _auth_headers(provider: ProviderConfig) -> dict[str, str]:
    if not provider.api_key_env_var:
        return {}
    key = os.environ.get(provider.api_key_env_var)
    if not key:
        raise AuthError(
            f"provider '{provider.name}': environment variable "
            f"'{provider.api_key_env_var}' is not set"
        )
    header = provider.auth_header_name or "Authorization"
    return {header: key}


def fetch_provider_page(
    provider: ProviderConfig,
    rendered: str,
    filters: SearchFilters,
    page: int,
    session: requests.Session | None = None,
    limiter: RateLimiter | None = None,
    sleep: Callable[[float], None] = time.sleep,
    timeout: float = 30.0,
) -> tuple[list[StudyRecord], bool]:
    """Fetch one result page; returns (records, has_more).

    Pacing goes through the provider's rate limiter. A 429 is retried once
    after honoring Retry-After, then raises RateLimitedError.
    """
    if page < 1:
        raise ValueError("page must be >= 1")
    headers = _auth_headers(provider)

    params: dict[str, Any] = {provider.query_param: rendered}
    paging = provider.paging
    if paging.style == "offset":
        params[paging.page_param] = (page - 1) * paging.page_size
    else:
        params[paging.page_param] = page
    params[paging.size_param] = paging.page_size
    for filter_field, param_name in provider.filter_params.items():
        value = getattr(filters, filter_field, None)
        if value is not None:
            params[param_name] = value

    sess = session or requests.Session()
    limiter = limiter or limiter_for(provider)

    response = None
    for attempt in (0, 1):
        limiter.acquire()
        try:
            response = sess.get(provider.base_url, params=params, headers=headers,
                                timeout=timeout)
        except requests.RequestException as exc:
            raise NetworkError(f"provider '{provider.name}': {exc}") from exc
        if response.status_code != 429:
            break
        if attempt == 0:
            retry_after = response.headers.get("Retry-After")
            try:
                delay = float(retry_after) if retry_after else 1.0
            except ValueError:
                delay = 1.0
            sleep(delay)
    if response.status_code == 429:
        raise RateLimitedError(f"provider '{provider.name}': still throttled after retry")
    if response.status_code in (401, 403):
        raise AuthError(f"provider '{provider.name}': HTTP {response.status_code}")
    if response.status_code >= 400:
        raise NetworkError(f"provider '{provider.name}': HTTP {response.status_code}")

    try:
        payload = response.json()
    except ValueError as exc:
        raise MalformedPayloadError(f"provider '{provider.name}': response is not JSON") from exc

    items_path = provider.field_map.get("items", "items")
    items = resolve_path(payload, items_path)
    if items is None or not isinstance(items, list):
        raise MalformedPayloadError(
            f"provider '{provider.name}': no record list at path '{items_path}'"
        )
    records = [map_item(provider, item) for item in items]

    if provider.total_path:
        total = resolve_path(payload, provider.total_path)
        if isinstance(total, (int, float)):
            has_more = page * paging.page_size < int(total)
        else:
            has_more = len(records) == paging.page_size and len(records) > 0
    else:
        has_more = len(records) == paging.page_size and len(records) > 0
    return records, has_more
