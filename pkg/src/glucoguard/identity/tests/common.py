from glucoguard.identity.data import (
    AgeClass,
    LinkedCredentials,
    Profile,
    RegistrationRequest,
    Role,
)


def patient_request(email: str = "pat@example.com", age_class=AgeClass.Adult):
    return RegistrationRequest(
        role=Role.Patient,
        profile=Profile(
            name="Pat", date_of_birth="1980-01-01", email=email, phone="555-0100"
        ),
        age_class=age_class,
    )


def doctor_request(patient_id: bytes, key: bytes, email: str = "doc@example.com"):
    return RegistrationRequest(
        role=Role.Doctor,
        profile=Profile(name="Doc", date_of_birth="1970-01-01", email=email),
        qualification="MD",
        job_details="Endocrinology",
        linked=(LinkedCredentials(patient_id, key),),
    )


def relative_request(patient_id: bytes, key: bytes, email: str = "rel@example.com"):
    return RegistrationRequest(
        role=Role.Relative,
        profile=Profile(name="Rel", date_of_birth="1990-01-01", email=email),
        linked=(LinkedCredentials(patient_id, key),),
    )
