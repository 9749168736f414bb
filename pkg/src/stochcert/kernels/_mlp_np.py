"""Pure-numpy MLP kernels (fallback backend).

Semantics are shared with the compiled backend in ``_mlp_cy.pyx``:

* ``params`` is a (S, H) batch of flat parameter vectors, one network
  realization per row, laid out layer-major with weights before biases
  (row-major weight matrices).
* ``xs`` is (1, d) or (S, d); a single row is broadcast to all realizations.
* ``mlp_forward`` returns the (S, k) pre-output scores (no softmax).
* ``mlp_vjp_input`` returns, per realization, the gradient with respect to
  the input of ``<gout_s, scores_s>`` — the vector-Jacobian product through
  the network body.

ReLU uses subgradient 0 at exactly 0.
"""

import numpy as np

ACT_RELU = 0
ACT_TANH = 1


def _layer_views(sizes, params):
    """Split (S, H) flat parameters into per-layer (W, b) views."""
    n_samples = params.shape[0]
    views = []
    off = 0
    for layer in range(len(sizes) - 1):
        n_in = int(sizes[layer])
        n_out = int(sizes[layer + 1])
        w = params[:, off : off + n_out * n_in].reshape(n_samples, n_out, n_in)
        off += n_out * n_in
        b = params[:, off : off + n_out]
        off += n_out
        views.append((w, b))
    return views


def _affine(w, b, a):
    # a is (S, n_in) or (1, n_in) broadcast against (S, n_out, n_in)
    if a.shape[0] == 1:
        return w @ a[0] + b
    return np.einsum("soi,si->so", w, a) + b


def mlp_forward(sizes, act_id, params, xs):
    layers = _layer_views(sizes, params)
    a = xs
    for w, b in layers[:-1]:
        z = _affine(w, b, a)
        a = np.maximum(z, 0.0) if act_id == ACT_RELU else np.tanh(z)
    w, b = layers[-1]
    return _affine(w, b, a)


def mlp_vjp_input(sizes, act_id, params, xs, gout):
    layers = _layer_views(sizes, params)
    acts = [xs]
    a = xs
    for w, b in layers[:-1]:
        z = _affine(w, b, a)
        a = np.maximum(z, 0.0) if act_id == ACT_RELU else np.tanh(z)
        acts.append(a)
    g = gout
    for layer in range(len(layers) - 1, -1, -1):
        w, _ = layers[layer]
        ga = np.einsum("soi,so->si", w, g)
        if layer == 0:
            return ga
        a = acts[layer]
        if act_id == ACT_RELU:
            g = ga * (a > 0.0)
        else:
            g = ga * (1.0 - a * a)
    raise AssertionError("unreachable")
