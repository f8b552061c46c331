import logging

logger = logging.getLogger(__name__)


class Prosthetics(Exception):
    def __init__(self, message=None, errors=None):
        if errors:
            message = ', '.join(errors)
        self.errors = errors
        if message:
            logger.error(message.rstrip())
        super(Exception, self).__init__(message)


class ProstheticsConfigError(Prosthetics):
    pass


class ProstheticsShapeError(Prosthetics):
    pass


class ProstheticsUsageError(Prosthetics):
    pass


class ProstheticsCompatibilityError(Prosthetics):
    pass


class ProstheticsNumericalError(Prosthetics):
    pass


class ProstheticsInsufficientData(Prosthetics):
    pass


class ProstheticsCheckpointError(Prosthetics):
    pass


class CheckpointVersionError(ProstheticsCheckpointError):
    pass


class CheckpointFingerprintError(ProstheticsCheckpointError, ProstheticsCompatibilityError):
    pass


class MalformedCheckpointError(ProstheticsCheckpointError):
    pass
