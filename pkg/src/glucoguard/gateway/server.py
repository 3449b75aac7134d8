"""Gateway web server."""

import logging
from typing import Any, Dict, Optional, Set, Tuple

from flask import Flask, current_app, jsonify, request
from flask.wrappers import Response
from werkzeug.exceptions import (
    BadRequest,
    Conflict,
    Forbidden,
    HTTPException,
    NotFound,
    ServiceUnavailable,
    Unauthorized,
    UnprocessableEntity,
)

from glucoguard.common.integrity import hexlify, unhexlify
from glucoguard.dosing.data import DosingError
from glucoguard.gateway.data import (
    AuthenticationFailed,
    BatchPending,
    InvalidApproval,
    MalformedRequest,
    ModelUnavailable,
    NoPendingBatch,
    NotAuthorized,
    PatientNotFound,
    readings_from_json,
)
from glucoguard.gateway.service import GlucoguardService
from glucoguard.identity.data import (
    AgeClass,
    DuplicateRegistration,
    LinkedCredentials,
    MissingField,
    Profile,
    RegistrationRequest,
    Role,
    UnknownLinkedPatient,
)
from glucoguard.ledger.chain import InsufficientApprovals, InvalidSignature, UnknownBlock
from glucoguard.ledger.data import TransactionKind

__author__ = "glucoguard"

logger = logging.getLogger(__name__)

SERVICE_KEY = "GLUCOGUARD_SERVICE"

# domain exception -> HTTP error
ERROR_MAP = [
    (AuthenticationFailed, Unauthorized),
    (NotAuthorized, Forbidden),
    (PatientNotFound, NotFound),
    (UnknownBlock, NotFound),
    (BatchPending, Conflict),
    (NoPendingBatch, Conflict),
    (DuplicateRegistration, Conflict),
    (UnknownLinkedPatient, UnprocessableEntity),
    (MissingField, BadRequest),
    (MalformedRequest, BadRequest),
    (InvalidApproval, BadRequest),
    (InvalidSignature, BadRequest),
    (DosingError, BadRequest),
    (InsufficientApprovals, ServiceUnavailable),
    (ModelUnavailable, ServiceUnavailable),
]


def _service() -> GlucoguardService:
    return current_app.config[SERVICE_KEY]  # type: ignore


def _json_body() -> Dict[str, Any]:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise BadRequest("Expected a JSON object")
    return data


def _hex_id(value: Any, what: str) -> bytes:
    try:
        return unhexlify(value)
    except ValueError:
        raise BadRequest(f"{what} must be 64 hex characters")


def authenticate() -> bytes:
    """Authenticate the X-User-Id / X-User-Key headers, return the user id."""
    user_id = request.headers.get("X-User-Id")
    key = request.headers.get("X-User-Key")
    if not user_id or not key:
        raise Unauthorized("Missing X-User-Id or X-User-Key")
    try:
        return _service().authenticate(unhexlify(user_id), unhexlify(key))
    except ValueError:
        raise Unauthorized("Malformed credentials")


def registration_from_json(data: Dict[str, Any]) -> RegistrationRequest:
    """Parse a registration body."""
    try:
        role = Role(data["role"])
        profile_data = data.get("profile", {})
        profile = Profile(
            name=profile_data.get("name", ""),
            date_of_birth=profile_data.get("date_of_birth", ""),
            email=profile_data.get("email", ""),
            phone=profile_data.get("phone"),
            address=profile_data.get("address"),
        )
        age_class = AgeClass(data["age_class"]) if data.get("age_class") else None
        linked = tuple(
            LinkedCredentials(_hex_id(item["patient_id"], "patient_id"), _hex_id(item["public_key"], "public_key"))
            for item in data.get("linked", [])
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise BadRequest(f"Malformed registration: {exc}")
    return RegistrationRequest(
        role=role,
        profile=profile,
        age_class=age_class,
        qualification=data.get("qualification"),
        job_details=data.get("job_details"),
        linked=linked,
    )


def register() -> Tuple[Response, int]:
    user_id, key = _service().register(registration_from_json(_json_body()))
    return jsonify({"user_id": hexlify(user_id), "public_key": hexlify(key)}), 201


def ingest() -> Tuple[Response, int]:
    actor = authenticate()
    data = _json_body()
    patient_id = _hex_id(data.get("patient_id"), "patient_id")
    items = data.get("readings")
    if not isinstance(items, list):
        raise BadRequest("readings must be a list")
    readings = readings_from_json(patient_id, items)
    summary = _service().ingest(actor, patient_id, readings)
    return jsonify(summary.to_dict()), 202


def approvals() -> Tuple[Response, int]:
    actor = authenticate()
    data = _json_body()
    patient_id = _hex_id(data.get("patient_id"), "patient_id")
    signature = _hex_id(data.get("signature"), "signature")
    summary = _service().approve(actor, patient_id, signature)
    return jsonify(summary.to_dict()), 202 if summary.status == "pending" else 200


def _int_arg(name: str) -> Optional[int]:
    value = request.args.get(name)
    if value is None or value == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise BadRequest(f"{name} must be an integer")


def history(patient_id: str) -> Response:
    actor = authenticate()
    kinds: Optional[Set[TransactionKind]] = None
    if request.args.get("kind"):
        try:
            kinds = {TransactionKind[k] for k in request.args["kind"].split(",")}
        except KeyError as exc:
            raise BadRequest(f"Unknown transaction kind {exc}")
    res = _service().history(
        actor, _hex_id(patient_id, "patient id"), kinds, _int_arg("from"), _int_arg("to")
    )
    return jsonify(res)


def pump(patient_id: str) -> Response:
    actor = authenticate()
    return jsonify(_service().pump_status(actor, _hex_id(patient_id, "patient id")))


def refill(patient_id: str) -> Response:
    actor = authenticate()
    volume = _json_body().get("volume_ml")
    if not isinstance(volume, (int, float)) or isinstance(volume, bool):
        raise BadRequest("volume_ml must be a number")
    try:
        volume_ml = float(volume)
    except OverflowError:
        raise BadRequest("volume_ml out of range")
    pump_state = _service().refill(actor, _hex_id(patient_id, "patient id"), volume_ml)
    return jsonify(pump_state.to_dict())


def acknowledge(patient_id: str) -> Response:
    actor = authenticate()
    note = str(_json_body().get("note", "")) if request.data else ""
    return jsonify(_service().acknowledge(actor, _hex_id(patient_id, "patient id"), note))


def chain_verify() -> Response:
    authenticate()
    error = _service().verify_chain()
    if error is None:
        return jsonify({"ok": True, "length": len(_service().ledger)})
    return jsonify({"ok": False, "error": {"block_index": error.block_index, "reason": error.reason.value}})


def chain_block(index: int) -> Response:
    actor = authenticate()
    return jsonify(_service().block(actor, index))


def handle_http_error(exc: HTTPException) -> Tuple[Response, int]:
    return jsonify({"error": exc.name, "message": exc.description}), exc.code or 500


def generate_app(service: GlucoguardService) -> Flask:
    """Generate app."""
    app = Flask(__name__)
    app.config[SERVICE_KEY] = service

    def _domain_error(exc: Exception) -> Tuple[Response, int]:
        for domain, http in ERROR_MAP:
            if isinstance(exc, domain):
                logger.info(f"{request.method} {request.path}: {http.code} {exc}")
                return handle_http_error(http(str(exc)))
        raise exc

    for domain, _ in ERROR_MAP:
        app.register_error_handler(domain, _domain_error)
    app.register_error_handler(HTTPException, handle_http_error)

    app.add_url_rule("/register", view_func=register, methods=["POST"])
    app.add_url_rule("/ingest", view_func=ingest, methods=["POST"])
    app.add_url_rule("/approvals", view_func=approvals, methods=["POST"])
    app.add_url_rule("/patients/<patient_id>/history", view_func=history, methods=["GET"])
    app.add_url_rule("/patients/<patient_id>/pump", view_func=pump, methods=["GET"])
    app.add_url_rule("/patients/<patient_id>/refill", view_func=refill, methods=["POST"])
    app.add_url_rule("/patients/<patient_id>/acknowledge", view_func=acknowledge, methods=["POST"])
    app.add_url_rule("/chain/verify", view_func=chain_verify, methods=["GET"])
    app.add_url_rule("/chain/blocks/<int:index>", view_func=chain_block, methods=["GET"])

    return app
