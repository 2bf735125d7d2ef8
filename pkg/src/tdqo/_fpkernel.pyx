# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled finite-part kernel.

Same algorithm as ``_fpkernel_py``: adaptive Gauss-Kronrod (7/15) on a
``u = s^2`` panel next to the singular point, ``u = exp(y)`` panels up to
the support edge, and a closed-form tail.  The per-point loop runs without
the GIL so callers may split the evaluation times across threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, sqrt, log, fabs, cos, sin, M_PI, NAN

cnp.import_array()

cdef enum:
    MAX_INTERVALS = 4000
    MAX_BREAKS = 8

cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.0]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]

cdef double NODES[15]
cdef double WK[15]
cdef double WG15[15]


cdef void _init_rule():
    cdef int i
    for i in range(7):
        NODES[i] = -XGK[i]
        NODES[14 - i] = XGK[i]
        WK[i] = WGK[i]
        WK[14 - i] = WGK[i]
        WG15[i] = 0.0
        WG15[14 - i] = 0.0
    NODES[7] = 0.0
    WK[7] = WGK[7]
    WG15[7] = WG[3]
    WG15[1] = WG[0]; WG15[13] = WG[0]
    WG15[3] = WG[1]; WG15[11] = WG[1]
    WG15[5] = WG[2]; WG15[9] = WG[2]


_init_rule()


cdef struct Ctx:
    int code
    double p0, p1, p2
    double amp
    double t
    double complex phi_t


cdef inline double complex shape_eval(Ctx* c, double x) nogil:
    cdef double ph, env
    if c.code == 1:
        if x >= 0.0:
            return exp(-x / (2.0 * c.p0)) / sqrt(c.p0)
        return 0.0
    env = c.amp * exp(-(x - c.p2) * (x - c.p2) / (4.0 * c.p0 * c.p0))
    ph = -2.0 * M_PI * c.p1 * x
    return env * cos(ph) + 1j * env * sin(ph)


cdef inline double complex cexpm1(double a, double b) nogil:
    cdef double sb = sin(0.5 * b)
    return (expm1(a) * cos(b) - 2.0 * sb * sb) + 1j * (exp(a) * sin(b))


cdef inline double complex shape_delta(Ctx* c, double d) nogil:
    # phi(t + d) - phi(t) without cancellation for small d
    cdef double x = c.t + d
    cdef double re_e, im_e
    if c.code == 1:
        if c.t <= 0.0:
            return shape_eval(c, x)
        if x >= 0.0:
            return c.phi_t * expm1(-d / (2.0 * c.p0))
        return -c.phi_t
    if c.phi_t == 0.0:
        return shape_eval(c, x)
    re_e = -(2.0 * d * (c.t - c.p2) + d * d) / (4.0 * c.p0 * c.p0)
    im_e = -2.0 * M_PI * c.p1 * d
    if re_e > 50.0:
        return shape_eval(c, x) - c.phi_t
    return c.phi_t * cexpm1(re_e, im_e)


cdef inline double complex numer(Ctx* c, double u) nogil:
    return (1.0 + 1j) * shape_delta(c, -u) + (1.0 - 1j) * shape_delta(c, u)


cdef inline double complex integrand(Ctx* c, int mode, double x) nogil:
    cdef double u
    if mode == 0:
        return 2.0 * numer(c, x * x) / (x * x)
    u = exp(x)
    return numer(c, u) / sqrt(u)


cdef inline void gk15(Ctx* c, int mode, double a, double b, double complex* k15, double* err) nogil:
    cdef double half = 0.5 * (b - a)
    cdef double mid = 0.5 * (a + b)
    cdef double complex sk = 0.0
    cdef double complex sg = 0.0
    cdef double complex v
    cdef int i
    for i in range(15):
        v = integrand(c, mode, mid + half * NODES[i])
        sk = sk + WK[i] * v
        sg = sg + WG15[i] * v
    k15[0] = half * sk
    err[0] = fabs(half) * abs_c(sk - sg)


cdef inline double abs_c(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef int panel(Ctx* c, int mode, double lo, double hi, double target, double complex* out) nogil:
    cdef double sa[MAX_INTERVALS]
    cdef double sb[MAX_INTERVALS]
    cdef int top = 0
    cdef int count = 0
    cdef int ok = 1
    cdef double width = hi - lo
    cdef double a, b, mid, err
    cdef double complex k15
    cdef double complex total = 0.0
    sa[0] = lo
    sb[0] = hi
    top = 1
    while top > 0:
        top -= 1
        a = sa[top]
        b = sb[top]
        gk15(c, mode, a, b, &k15, &err)
        count += 1
        mid = 0.5 * (a + b)
        if (err <= target * (b - a) / width or count >= MAX_INTERVALS
                or 0.5 * (b - a) < 1e-15 * width or top + 2 > MAX_INTERVALS):
            if err > target * (b - a) / width:
                ok = 0
            total = total + k15
        else:
            sa[top] = mid
            sb[top] = b
            sa[top + 1] = a
            sb[top + 1] = mid
            top += 2
    out[0] = total
    return ok


cdef void insert_sorted(double* arr, int* n, double v) nogil:
    cdef int i, j
    for i in range(n[0]):
        if arr[i] == v:
            return
    i = n[0]
    while i > 0 and arr[i - 1] > v:
        arr[i] = arr[i - 1]
        i -= 1
    arr[i] = v
    n[0] += 1


cdef int chi_point(Ctx* c, double t, double rtol, double atol, double complex* out) nogil:
    cdef double a, b, upper, jump
    cdef int has_jump = 0
    cdef double edges[MAX_BREAKS]
    cdef int ne = 0
    cdef double cands[4]
    cdef int nc = 0
    cdef int i, mode, status = 0
    cdef double lo, hi, target
    cdef double complex rough, tail, val, total, k
    cdef double err
    if c.code == 1:
        a = 0.0
        b = 80.0 * c.p0
        has_jump = 1
        jump = 0.0
        if t == jump:
            out[0] = NAN + 1j * NAN
            return 2
    else:
        a = c.p2 - 13.0 * c.p0
        b = c.p2 + 13.0 * c.p0
    c.t = t
    c.phi_t = shape_eval(c, t)
    upper = t - a
    if b - t > upper:
        upper = b - t
    if upper <= 0.0:
        out[0] = 0.0
        return 0
    if has_jump:
        cands[nc] = fabs(t - jump); nc += 1
    cands[nc] = fabs(t - a); nc += 1
    cands[nc] = fabs(t - b); nc += 1
    if c.code == 2:
        cands[nc] = fabs(t - c.p2); nc += 1
    for i in range(nc):
        if cands[i] > 0.0 and cands[i] < upper:
            insert_sorted(edges, &ne, cands[i])
    edges[ne] = upper
    ne += 1

    tail = -4.0 * c.phi_t / sqrt(upper)
    gk15(c, 0, 0.0, sqrt(edges[0]), &k, &err)
    rough = k
    for i in range(ne - 1):
        gk15(c, 1, log(edges[i]), log(edges[i + 1]), &k, &err)
        rough = rough + k
    rough = rough + tail
    target = rtol * abs_c(rough)
    if target < atol:
        target = atol
    target = target / ne

    total = tail
    if not panel(c, 0, 0.0, sqrt(edges[0]), target, &val):
        status = 1
    total = total + val
    for i in range(ne - 1):
        if not panel(c, 1, log(edges[i]), log(edges[i + 1]), target, &val):
            status = 1
        total = total + val
    out[0] = total
    return status


def chi_finite_part(int code, params, t_eval, double rtol=1e-10, double atol=1e-13, int nthreads=1):
    """Finite-part chi of an analytic shape at each time in ``t_eval``.

    Returns ``(values, status)`` with status 0 ok, 1 not converged,
    2 singular point.
    """
    if code not in (1, 2):
        raise ValueError(f"unknown shape code {code}")
    cdef cnp.ndarray[double, ndim=1] p = np.zeros(3)
    pin = np.asarray(params, dtype=float).ravel()
    p[: pin.size] = pin
    tt = np.ascontiguousarray(np.asarray(t_eval, dtype=float).ravel())
    out = np.empty(tt.size, dtype=complex)
    status = np.zeros(tt.size, dtype=np.int32)
    if nthreads <= 1 or tt.size < 64:
        _run(code, p[0], p[1], p[2], tt, out, status, rtol, atol)
    else:
        from concurrent.futures import ThreadPoolExecutor
        bounds = np.linspace(0, tt.size, nthreads + 1).astype(int)
        with ThreadPoolExecutor(nthreads) as ex:
            futs = [
                ex.submit(_run, code, p[0], p[1], p[2], tt[lo:hi], out[lo:hi], status[lo:hi], rtol, atol)
                for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo
            ]
            for fu in futs:
                fu.result()
    shape = np.shape(t_eval)
    return out.reshape(shape), status.reshape(shape)


def _run(int code, double p0, double p1, double p2, double[::1] tt,
         double complex[::1] out, int[::1] status, double rtol, double atol):
    cdef Ctx c
    cdef Py_ssize_t i
    c.code = code
    c.p0 = p0
    c.p1 = p1
    c.p2 = p2
    c.amp = (2.0 * M_PI * p0 * p0) ** -0.25
    with nogil:
        for i in range(tt.shape[0]):
            status[i] = chi_point(&c, tt[i], rtol, atol, &out[i])
