"""
API Response Utilities
Standardized response envelopes and JSON-safe conversion of run data.
"""
import math

import numpy as np
from flask import jsonify

from utils.errors import MoeaError

ERROR_STATUS = {
    'CONFIG_ERROR': 400,
    'NOT_FOUND': 404,
    'OUTPUT_ERROR': 500,
}


def to_jsonable(value):
    """
    Convert numpy values and non-finite floats into plain JSON values.

    NaN becomes None; infinities become the strings "inf" / "-inf".

    Args:
        value: Scalar, array, list or dict

    Returns:
        JSON-serializable copy
    """
    if isinstance(value, dict):
        return {key: to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
    return value


def error_response(code: str, message: str, status_code: int = 400) -> tuple:
    """
    Create standardized error response.

    Args:
        code: Error code string
        message: Error message
        status_code: HTTP status code

    Returns:
        tuple: (JSON response, status code)
    """
    return jsonify({
        'success': False,
        'error': {
            'code': code,
            'message': message,
        }
    }), status_code


def success_response(data=None, message: str = '', status_code: int = 200, **kwargs) -> tuple:
    """
    Create standardized success response.

    Args:
        data: Response data (dict, list, or None)
        message: Optional success message
        status_code: HTTP status code
        **kwargs: Additional fields (count, total, etc.)

    Returns:
        tuple: (JSON response, status code)
    """
    response = {'success': True}

    if data is not None:
        response['data'] = data

    if message:
        response['message'] = message

    response.update(kwargs)

    return jsonify(response), status_code


def moea_error_response(error: MoeaError) -> tuple:
    """Error envelope for a toolkit exception, status chosen by its code."""
    return error_response(error.code, str(error), ERROR_STATUS.get(error.code, 500))
