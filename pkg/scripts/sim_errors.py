#!/usr/bin/env python3
"""
Exception and warning types shared by the simulator modules.
"""
from typing import Any, Dict, Optional


class ConfigError(ValueError):
    """Invalid experiment configuration, located by dotted field path and line"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = ''
        if field:
            location += f"{field}: "
        if line is not None:
            location = f"line {line}: " + location
        super().__init__(f"{location}{message}")


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its tolerance"""

    def __init__(self, operation: str, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.operation = operation
        self.diagnostics = dict(diagnostics or {})
        details = ''
        if self.diagnostics:
            details = ' (' + ', '.join(f"{k}={v}" for k, v in sorted(self.diagnostics.items())) + ')'
        super().__init__(f"{operation}: {message}{details}")


class PhysicsValidityWarning(UserWarning):
    """Parameters fall outside the regime where an approximation is trustworthy"""
