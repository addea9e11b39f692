"""
Truncated Taylor arithmetic
A Jet holds the Taylor coefficients c[0..K] of t -> g(x + t*v); model vector
fields written with + - * / and integer powers evaluate exactly on Jets
"""

import numpy as np


class Jet:
    """Truncated power series in one variable with array-valued coefficients"""

    # numpy must defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs)

    @classmethod
    def variable(cls, base, direction, order):
        base = np.asarray(base)
        direction = np.asarray(direction)
        dtype = np.result_type(base, direction, float)
        c = np.zeros((order + 1,) + np.broadcast(base, direction).shape, dtype=dtype)
        c[0] = base
        if order >= 1:
            c[1] = direction
        return cls(c)

    @property
    def order(self):
        return self.c.shape[0] - 1

    def coefficient(self, k):
        return self.c[k]

    def _lift(self, other):
        c = np.zeros((self.c.shape[0],) + np.broadcast_shapes(self.c.shape[1:], np.shape(other)),
                     dtype=np.result_type(self.c, other))
        c[0] = other
        return c

    def _pair(self, other):
        b = other.c if isinstance(other, Jet) else self._lift(other)
        shape = np.broadcast_shapes(self.c.shape[1:], b.shape[1:])
        return _spread(self.c, shape), _spread(b, shape)

    def __add__(self, other):
        a, b = self._pair(other)
        return Jet(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._pair(other)
        return Jet(a - b)

    def __rsub__(self, other):
        a, b = self._pair(other)
        return Jet(b - a)

    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            return Jet(_spread(self.c, np.broadcast_shapes(self.c.shape[1:], other.shape)) * other)
        a, b = self.c, other.c
        K = a.shape[0]
        out = np.zeros((K,) + np.broadcast(a[0], b[0]).shape, dtype=np.result_type(a, b))
        for k in range(K):
            for i in range(k + 1):
                out[k] = out[k] + a[i] * b[k - i]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            return Jet(_spread(self.c, np.broadcast_shapes(self.c.shape[1:], other.shape)) / other)
        a, b = self.c, other.c
        K = a.shape[0]
        q = np.zeros((K,) + np.broadcast(a[0], b[0]).shape, dtype=np.result_type(a, b, float))
        for k in range(K):
            acc = a[k]
            for i in range(1, k + 1):
                acc = acc - b[i] * q[k - i]
            q[k] = acc / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return Jet(self._lift(other)) / self

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, np.integer)) or exponent < 0:
            raise TypeError("Jet powers must be non-negative integers")
        result = Jet(self._lift(1.0))
        for _ in range(int(exponent)):
            result = result * self
        return result


def taylor_coefficient(value, k, shape):
    """k-th coefficient of a field component that may be a Jet or a constant"""
    if isinstance(value, Jet):
        return np.broadcast_to(value.c[k], shape)
    if k == 0:
        return np.broadcast_to(np.asarray(value), shape)
    return np.zeros(shape)


def _spread(c, shape):
    """Insert unit axes after the series axis so c broadcasts against arrays of the given shape"""
    return c.reshape((c.shape[0],) + (1,) * (len(shape) - c.ndim + 1) + c.shape[1:])
