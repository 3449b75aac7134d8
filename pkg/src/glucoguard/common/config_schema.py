"""Config validation schema."""

from voluptuous import All, Any, Length, Range, Schema, Url

PORT = All(int, Range(min=1, max=65535))
POSITIVE_INT = All(int, Range(min=1))

GATEWAY_SCHEMA = Schema(
    {
        "host": All(str, Length(min=1)),
        "port": PORT,
        "webhook_url": Any(None, Url()),
        "webhook_timeout": All(Any(int, float), Range(min=0, min_included=False)),
        "notification_log": Any(None, str),
        "auto_approve": bool,
        "record_retrievals": bool,
    }
)

LEDGER_SCHEMA = Schema(
    {"store": Any(None, str), "approval_threshold": Any("majority", POSITIVE_INT)}
)

IDENTITY_SCHEMA = Schema(
    {
        "store": Any(None, str),
        "block_threshold": POSITIVE_INT,
        "seed": Any(None, All(int, Range(min=0))),
    }
)

DETECTOR_SCHEMA = Schema(
    {
        "model": Any(None, str),
        "n_trees": POSITIVE_INT,
        "max_depth": POSITIVE_INT,
        "seed": All(int, Range(min=0)),
        "features_per_split": All(int, Range(min=1, max=5)),
        "bootstrap": bool,
        "min_samples_leaf": POSITIVE_INT,
        "min_samples_split": All(int, Range(min=2)),
        "threshold": All(Any(int, float), Range(min=0, max=1)),
    }
)

DOSING_SCHEMA = Schema(
    {
        "reservoir_ml": All(Any(int, float), Range(min=0)),
        "max_cycles": POSITIVE_INT,
        "recheck_minutes": POSITIVE_INT,
        "refill_alert_doses": All(int, Range(min=0)),
        "hypo_threshold": All(Any(int, float), Range(min=0)),
    }
)

GLUCOGUARD_CONFIG_SCHEMA = Schema(
    {
        "gateway": GATEWAY_SCHEMA,
        "ledger": LEDGER_SCHEMA,
        "identity": IDENTITY_SCHEMA,
        "detector": DETECTOR_SCHEMA,
        "dosing": DOSING_SCHEMA,
    }
)
