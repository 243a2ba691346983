"""
Custom Exception Classes for the Reeb network diagnostics toolkit

This module defines all custom exceptions used throughout the library,
the stage agents and the command line, for precise error handling and
reporting.
"""


class ReebNetException(Exception):
    """Base exception for all custom exceptions in the toolkit"""

    def __init__(self, message: str, details: dict = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self):
        """Convert exception to dictionary for structured logging"""
        return {
            "exception_type": self.__class__.__name__,
            "message": self.message,
            "details": self.details
        }


# Validation Exceptions
class ValidationException(ReebNetException):
    """Base exception for validation errors"""
    pass


class InvalidInputError(ValidationException):
    """Raised when input validation fails"""
    pass


class InvalidParameterError(ValidationException):
    """Raised when an algorithm parameter is out of range"""
    pass


class DimensionMismatchError(ValidationException):
    """Raised when matrices, graphs or label vectors disagree in size"""
    pass


class InvalidLabelError(ValidationException):
    """Raised when a class index is outside [0, num_classes)"""
    pass


class MissingProbabilitiesError(ValidationException):
    """Raised when an operation needs prediction probabilities that were not supplied"""
    pass


class NonBinaryTaskError(ValidationException):
    """Raised when binary label correction is requested on a multi-class task"""
    pass


class DegenerateTruthError(ValidationException):
    """Raised when an AUC is requested without both positives and negatives"""
    pass


# Graph Exceptions
class GraphException(ReebNetException):
    """Base exception for graph construction errors"""
    pass


class InvalidGraphError(GraphException):
    """Raised on self-loops, duplicate edges, bad endpoints or negative weights"""
    pass


# Lens Exceptions
class LensException(ReebNetException):
    """Base exception for lens matrix errors"""
    pass


class NonFiniteLensError(LensException):
    """Raised when a lens matrix contains NaN or infinite entries"""
    pass


class ZeroSpreadError(LensException):
    """Raised when a split is requested along a lens that is constant on the set"""
    pass


# Data IO Exceptions
class DataIOException(ReebNetException):
    """Base exception for reading and writing data files"""
    pass


class InputFileNotFoundError(DataIOException):
    """Raised when an input file does not exist"""
    pass


class InputFormatError(DataIOException):
    """Raised when an input file cannot be parsed"""
    pass


class ReportWriteError(DataIOException):
    """Raised when report files cannot be written"""
    pass


class ReportFormatError(DataIOException):
    """Raised when a report file does not match its schema"""
    pass


# Configuration Exceptions
class ConfigurationException(ReebNetException):
    """Base exception for configuration errors"""
    pass


class ConfigurationFileNotFoundError(ConfigurationException):
    """Raised when configuration file is not found"""
    pass


class ConfigurationValidationError(ConfigurationException):
    """Raised when configuration validation fails"""
    pass


class MissingEnvironmentVariableError(ConfigurationException):
    """Raised when required environment variable is missing"""
    pass


# Agent Related Exceptions
class AgentException(ReebNetException):
    """Base exception for stage agent errors"""
    pass


class GraphLoaderException(AgentException):
    """Raised when Graph Loader Agent encounters an error"""
    pass


class ReebBuilderException(AgentException):
    """Raised when Reeb Builder Agent encounters an error"""
    pass


class ErrorEstimatorException(AgentException):
    """Raised when Error Estimator Agent encounters an error"""
    pass


class ReportWriterException(AgentException):
    """Raised when Report Writer Agent encounters an error"""
    pass


# Orchestration Exceptions
class OrchestrationException(ReebNetException):
    """Base exception for orchestration errors"""
    pass


class StageExecutionError(OrchestrationException):
    """Raised when a pipeline stage fails"""
    pass
