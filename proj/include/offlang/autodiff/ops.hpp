// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

// Differentiable primitives. Shapes use {n} for vectors and {r, c} for
// row-major matrices; scalars are {1}.
//
//   matmul(A{m,k}, B{k,n})      -> {m,n}     A B
//   matmul(A{m,k}, x{k})        -> {m}       A x
//   add(a, b)                   -> a + b     same shape, or a{m,n} + b{n} added to every row
//   sub(a, b), mul(a, b)        -> elementwise, same shape
//   scale(a, s)                 -> s a
//   one_minus(a)                -> 1 - a
//   concat({v1{n1}, v2{n2}..})  -> {n1+n2+..}
//   stack_rows({v{n}, ...})     -> {k,n}
//   row(A{m,n}, i)              -> {n}
//   transpose(A{m,n})           -> {n,m}
//   embed_lookup(E{V,D}, ids)   -> {L,D}     row ids[t] of E at position t
//   conv1d(x{L,D}, W{F,w*D}, b{F}) -> {L-w+1,F}
//                                 out[t,f] = b[f] + sum_{k<w,d<D} W[f, k*D+d] x[t+k, d]
//   max_over_time(x{L,F})       -> {F}       column maxima; ties go to the first row
//   tanh, relu, sigmoid         -> elementwise
//   dropout(x, rate, train, rng)-> x * mask / (1 - rate) when training, x otherwise
//   lstm_step(x{D}, h{H}, c{H}, W{4H,D+H}, b{4H}) -> {2,H} rows [h'; c']
//                                 z = W [x; h] + b, gates in the order i, f, g, o:
//                                 i = sig(z_i), f = sig(z_f), g = tanh(z_g), o = sig(z_o)
//                                 c' = f c + i g,  h' = o tanh(c')
//   softmax(x{n})               -> {n}
//   softmax_xent_sparse(z{K}, y)-> {1}       log(sum exp z) - z[y]
//   sum(x), mean(x)             -> {1}
//   add_n({a, b, ...})          -> elementwise sum of same-shaped tensors
//   flood(J{1}, b)              -> {1}       |J - b| + b; dJ~/dJ = +1 when J >= b, -1 otherwise

#pragma once

#include "offlang/autodiff/tape.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace offlang::ad {

namespace detail {

inline void require(bool ok, const std::string& op, const std::string& what) {
    if (!ok) throw ShapeMismatch(op + ": " + what);
}

template <class T>
std::string shapes(const Tensor<T>& a, const Tensor<T>& b) {
    return a.shape_str() + " vs " + b.shape_str();
}

template <class T>
T sigmoid(T x) {
    return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

template <class T, class F>
Var<T> unary(Var<T> a, F forward, std::function<T(T x, T y)> dydx) {
    auto& t = *a.tape;
    Tensor<T> out = t.value(a);
    for (auto& v : out.data) v = forward(v);
    const auto ia = a.id;
    return t.record(std::move(out), {a}, [ia, dydx](Tape<T>& tp, std::size_t self) {
        auto* ga = tp.grad_if(ia);
        const auto& x = tp.value_of(ia);
        const auto& y = tp.value_of(self);
        const auto& gy = *tp.grad_if(self);
        for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i] * dydx(x[i], y[i]);
    });
}

}  // namespace detail

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
    auto& t = *a.tape;
    const auto& A = t.value(a);
    const auto& B = t.value(b);
    detail::require(A.rank() == 2, "matmul", "left operand must be a matrix, got " + A.shape_str());
    const std::size_t m = A.rows(), k = A.cols();
    const auto ia = a.id, ib = b.id;
    if (B.rank() == 1) {
        detail::require(B.size() == k, "matmul", detail::shapes(A, B));
        Tensor<T> y({m});
        for (std::size_t i = 0; i < m; ++i) {
            T s = 0;
            const T* ar = &A.data[i * k];
            for (std::size_t j = 0; j < k; ++j) s += ar[j] * B[j];
            y[i] = s;
        }
        return t.record(std::move(y), {a, b}, [ia, ib, m, k](Tape<T>& tp, std::size_t self) {
            const auto& gy = *tp.grad_if(self);
            const auto& A = tp.value_of(ia);
            const auto& x = tp.value_of(ib);
            if (auto* gA = tp.grad_if(ia)) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < k; ++j) (*gA)[i * k + j] += gy[i] * x[j];
            }
            if (auto* gx = tp.grad_if(ib)) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < k; ++j) (*gx)[j] += gy[i] * A[i * k + j];
            }
        });
    }
    detail::require(B.rank() == 2 && B.rows() == k, "matmul", detail::shapes(A, B));
    const std::size_t n = B.cols();
    Tensor<T> C({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const T av = A.data[i * k + p];
            for (std::size_t j = 0; j < n; ++j) C.data[i * n + j] += av * B.data[p * n + j];
        }
    return t.record(std::move(C), {a, b}, [ia, ib, m, k, n](Tape<T>& tp, std::size_t self) {
        const auto& gC = *tp.grad_if(self);
        const auto& A = tp.value_of(ia);
        const auto& B = tp.value_of(ib);
        if (auto* gA = tp.grad_if(ia)) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    T s = 0;
                    for (std::size_t j = 0; j < n; ++j) s += gC.data[i * n + j] * B.data[p * n + j];
                    (*gA)[i * k + p] += s;
                }
        }
        if (auto* gB = tp.grad_if(ib)) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const T av = A.data[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) (*gB)[p * n + j] += av * gC.data[i * n + j];
                }
        }
    });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
    auto& t = *a.tape;
    const auto& A = t.value(a);
    const auto& B = t.value(b);
    const auto ia = a.id, ib = b.id;
    if (A.shape == B.shape) {
        Tensor<T> out = A;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
        return t.record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, std::size_t self) {
            const auto& g = *tp.grad_if(self);
            for (auto id : {ia, ib})
                if (auto* gi = tp.grad_if(id))
                    for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
        });
    }
    detail::require(A.rank() == 2 && B.rank() == 1 && B.size() == A.cols(), "add", detail::shapes(A, B));
    const std::size_t m = A.rows(), n = A.cols();
    Tensor<T> out = A;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] += B[j];
    return t.record(std::move(out), {a, b}, [ia, ib, m, n](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        if (auto* ga = tp.grad_if(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        if (auto* gb = tp.grad_if(ib))
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) (*gb)[j] += g.data[i * n + j];
    });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
    auto& t = *a.tape;
    const auto& A = t.value(a);
    const auto& B = t.value(b);
    detail::require(A.shape == B.shape, "sub", detail::shapes(A, B));
    Tensor<T> out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
    const auto ia = a.id, ib = b.id;
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        if (auto* ga = tp.grad_if(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        if (auto* gb = tp.grad_if(ib))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
    auto& t = *a.tape;
    const auto& A = t.value(a);
    const auto& B = t.value(b);
    detail::require(A.shape == B.shape, "mul", detail::shapes(A, B));
    Tensor<T> out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
    const auto ia = a.id, ib = b.id;
    return t.record(std::move(out), {a, b}, [ia, ib](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        const auto& A = tp.value_of(ia);
        const auto& B = tp.value_of(ib);
        if (auto* ga = tp.grad_if(ia))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * B[i];
        if (auto* gb = tp.grad_if(ib))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * A[i];
    });
}

template <class T>
Var<T> scale(Var<T> a, T s) {
    return detail::unary<T>(a, [s](T x) { return s * x; }, [s](T, T) { return s; });
}

template <class T>
Var<T> one_minus(Var<T> a) {
    return detail::unary<T>(a, [](T x) { return T(1) - x; }, [](T, T) { return T(-1); });
}

template <class T>
Var<T> tanh(Var<T> a) {
    return detail::unary<T>(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Var<T> relu(Var<T> a) {
    return detail::unary<T>(a, [](T x) { return x > T(0) ? x : T(0); },
                            [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <class T>
Var<T> sigmoid(Var<T> a) {
    return detail::unary<T>(a, [](T x) { return detail::sigmoid(x); }, [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Var<T> concat(const std::vector<Var<T>>& parts) {
    detail::require(!parts.empty(), "concat", "no inputs");
    auto& t = *parts.front().tape;
    std::vector<T> out;
    std::vector<std::size_t> ids, offsets;
    for (const auto& p : parts) {
        const auto& v = t.value(p);
        detail::require(v.rank() == 1, "concat", "inputs must be vectors, got " + v.shape_str());
        ids.push_back(p.id);
        offsets.push_back(out.size());
        out.insert(out.end(), v.data.begin(), v.data.end());
    }
    return t.record(Tensor<T>::vector(std::move(out)), parts, [ids, offsets](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (auto* gk = tp.grad_if(ids[k]))
                for (std::size_t i = 0; i < gk->size(); ++i) (*gk)[i] += g[offsets[k] + i];
        }
    });
}

template <class T>
Var<T> stack_rows(const std::vector<Var<T>>& rows) {
    detail::require(!rows.empty(), "stack_rows", "no inputs");
    auto& t = *rows.front().tape;
    const std::size_t n = t.value(rows.front()).size();
    std::vector<T> out;
    std::vector<std::size_t> ids;
    for (const auto& r : rows) {
        const auto& v = t.value(r);
        detail::require(v.rank() == 1 && v.size() == n, "stack_rows", "rows must be vectors of equal length");
        ids.push_back(r.id);
        out.insert(out.end(), v.data.begin(), v.data.end());
    }
    return t.record(Tensor<T>({rows.size(), n}, std::move(out)), rows, [ids, n](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (auto* gk = tp.grad_if(ids[k]))
                for (std::size_t i = 0; i < n; ++i) (*gk)[i] += g[k * n + i];
        }
    });
}

template <class T>
Var<T> row(Var<T> a, std::size_t r) {
    auto& t = *a.tape;
    const auto& A = t.value(a);
    detail::require(A.rank() == 2 && r < A.rows(), "row", "row " + std::to_string(r) + " of " + A.shape_str());
    const std::size_t n = A.cols();
    std::vector<T> out(A.data.begin() + static_cast<std::ptrdiff_t>(r * n),
                       A.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * n));
    const auto ia = a.id;
    return t.record(Tensor<T>::vector(std::move(out)), {a}, [ia, r, n](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        auto& ga = *tp.grad_if(ia);
        for (std::size_t i = 0; i < n; ++i) ga[r * n + i] += g[i];
    });
}

template <class T>
Var<T> transpose(Var<T> a) {
    auto& t = *a.tape;
    const auto& A = t.value(a);
    detail::require(A.rank() == 2, "transpose", "expected a matrix, got " + A.shape_str());
    const std::size_t m = A.rows(), n = A.cols();
    Tensor<T> out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data[j * m + i] = A.data[i * n + j];
    const auto ia = a.id;
    return t.record(std::move(out), {a}, [ia, m, n](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        auto& ga = *tp.grad_if(ia);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
    });
}

template <class T>
Var<T> embed_lookup(Var<T> table, const std::vector<std::size_t>& ids) {
    auto& t = *table.tape;
    const auto& E = t.value(table);
    detail::require(E.rank() == 2, "embed_lookup", "table must be a matrix, got " + E.shape_str());
    detail::require(!ids.empty(), "embed_lookup", "empty id sequence");
    const std::size_t V = E.rows(), D = E.cols();
    Tensor<T> out({ids.size(), D});
    for (std::size_t r = 0; r < ids.size(); ++r) {
        detail::require(ids[r] < V, "embed_lookup", "id " + std::to_string(ids[r]) + " outside table of " +
                                                        std::to_string(V) + " rows");
        std::copy_n(&E.data[ids[r] * D], D, &out.data[r * D]);
    }
    const auto it = table.id;
    return t.record(std::move(out), {table}, [it, ids, D](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        auto& gE = *tp.grad_if(it);
        for (std::size_t r = 0; r < ids.size(); ++r)
            for (std::size_t d = 0; d < D; ++d) gE[ids[r] * D + d] += g[r * D + d];
    });
}

template <class T>
Var<T> conv1d(Var<T> x, Var<T> w, Var<T> b) {
    auto& t = *x.tape;
    const auto& X = t.value(x);
    const auto& W = t.value(w);
    const auto& B = t.value(b);
    detail::require(X.rank() == 2 && W.rank() == 2 && B.rank() == 1, "conv1d",
                    "expected x{L,D}, W{F,w*D}, b{F}, got " + X.shape_str() + ", " + W.shape_str() + ", " +
                        B.shape_str());
    const std::size_t L = X.rows(), D = X.cols(), F = W.rows();
    detail::require(W.cols() % D == 0 && W.cols() > 0, "conv1d", "filter width does not divide " + W.shape_str());
    const std::size_t width = W.cols() / D;
    detail::require(B.size() == F, "conv1d", "bias " + B.shape_str() + " for " + std::to_string(F) + " filters");
    detail::require(L >= width, "conv1d", "sequence of length " + std::to_string(L) + " shorter than width " +
                                              std::to_string(width));
    const std::size_t T_out = L - width + 1, K = width * D;
    Tensor<T> out({T_out, F});
    for (std::size_t s = 0; s < T_out; ++s) {
        const T* window = &X.data[s * D];  // rows s..s+width-1 are contiguous
        for (std::size_t f = 0; f < F; ++f) {
            T acc = B[f];
            const T* wf = &W.data[f * K];
            for (std::size_t j = 0; j < K; ++j) acc += wf[j] * window[j];
            out.data[s * F + f] = acc;
        }
    }
    const auto ix = x.id, iw = w.id, ib = b.id;
    return t.record(std::move(out), {x, w, b}, [ix, iw, ib, T_out, F, K, D](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        const auto& X = tp.value_of(ix);
        const auto& W = tp.value_of(iw);
        auto* gX = tp.grad_if(ix);
        auto* gW = tp.grad_if(iw);
        auto* gB = tp.grad_if(ib);
        for (std::size_t s = 0; s < T_out; ++s) {
            for (std::size_t f = 0; f < F; ++f) {
                const T gv = g.data[s * F + f];
                if (gv == T(0)) continue;
                if (gB) (*gB)[f] += gv;
                if (gW)
                    for (std::size_t j = 0; j < K; ++j) (*gW)[f * K + j] += gv * X.data[s * D + j];
                if (gX)
                    for (std::size_t j = 0; j < K; ++j) (*gX)[s * D + j] += gv * W.data[f * K + j];
            }
        }
    });
}

template <class T>
Var<T> max_over_time(Var<T> x) {
    auto& t = *x.tape;
    const auto& X = t.value(x);
    detail::require(X.rank() == 2 && X.rows() > 0, "max_over_time", "expected a non-empty matrix, got " + X.shape_str());
    const std::size_t L = X.rows(), F = X.cols();
    Tensor<T> out({F});
    std::vector<std::size_t> arg(F, 0);
    for (std::size_t f = 0; f < F; ++f) {
        out[f] = X.data[f];
        for (std::size_t s = 1; s < L; ++s) {
            if (X.data[s * F + f] > out[f]) {
                out[f] = X.data[s * F + f];
                arg[f] = s;
            }
        }
    }
    const auto ix = x.id;
    return t.record(std::move(out), {x}, [ix, arg, F](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        auto& gx = *tp.grad_if(ix);
        for (std::size_t f = 0; f < F; ++f) gx[arg[f] * F + f] += g[f];
    });
}

template <class T>
Var<T> dropout(Var<T> x, double rate, bool train, std::mt19937_64& rng) {
    if (!train || rate <= 0.0) return x;
    if (rate >= 1.0) throw ConfigError("dropout rate must be below 1");
    auto& t = *x.tape;
    const auto& X = t.value(x);
    std::bernoulli_distribution keep(1.0 - rate);
    const T s = T(1) / static_cast<T>(1.0 - rate);
    std::vector<T> mask(X.size());
    for (auto& m : mask) m = keep(rng) ? s : T(0);
    Tensor<T> out = X;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
    const auto ix = x.id;
    return t.record(std::move(out), {x}, [ix, mask = std::move(mask)](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        auto& gx = *tp.grad_if(ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
    });
}

template <class T>
Var<T> lstm_step(Var<T> x, Var<T> h, Var<T> c, Var<T> w, Var<T> b) {
    auto& t = *x.tape;
    const auto& X = t.value(x);
    const auto& Hv = t.value(h);
    const auto& Cv = t.value(c);
    const auto& W = t.value(w);
    const auto& B = t.value(b);
    const std::size_t D = X.size(), H = Hv.size();
    detail::require(X.rank() == 1 && Hv.rank() == 1 && Cv.shape == Hv.shape, "lstm_step",
                    "x, h, c must be vectors with |h| = |c|");
    detail::require(W.rank() == 2 && W.rows() == 4 * H && W.cols() == D + H && B.rank() == 1 && B.size() == 4 * H,
                    "lstm_step", "weights " + W.shape_str() + " / bias " + B.shape_str() + " for D=" +
                                     std::to_string(D) + ", H=" + std::to_string(H));
    const std::size_t K = D + H;
    std::vector<T> in(K);
    std::copy(X.data.begin(), X.data.end(), in.begin());
    std::copy(Hv.data.begin(), Hv.data.end(), in.begin() + static_cast<std::ptrdiff_t>(D));
    std::vector<T> gates(4 * H);  // post-activation i, f, g, o
    for (std::size_t r = 0; r < 4 * H; ++r) {
        T z = B[r];
        const T* wr = &W.data[r * K];
        for (std::size_t j = 0; j < K; ++j) z += wr[j] * in[j];
        gates[r] = (r / H == 2) ? std::tanh(z) : detail::sigmoid(z);
    }
    Tensor<T> out({2, H});
    std::vector<T> tanh_c(H);
    for (std::size_t j = 0; j < H; ++j) {
        const T cn = gates[H + j] * Cv[j] + gates[j] * gates[2 * H + j];
        tanh_c[j] = std::tanh(cn);
        out.data[j] = gates[3 * H + j] * tanh_c[j];
        out.data[H + j] = cn;
    }
    const auto ix = x.id, ih = h.id, ic = c.id, iw = w.id, ib = b.id;
    return t.record(
        std::move(out), {x, h, c, w, b},
        [ix, ih, ic, iw, ib, D, H, K, in = std::move(in), gates = std::move(gates),
         tanh_c = std::move(tanh_c)](Tape<T>& tp, std::size_t self) {
            const auto& g = *tp.grad_if(self);
            const auto& C = tp.value_of(ic);
            const auto& W = tp.value_of(iw);
            std::vector<T> dz(4 * H);
            auto* gc = tp.grad_if(ic);
            for (std::size_t j = 0; j < H; ++j) {
                const T i = gates[j], f = gates[H + j], gg = gates[2 * H + j], o = gates[3 * H + j];
                const T dh = g.data[j];
                const T dc = g.data[H + j] + dh * o * (T(1) - tanh_c[j] * tanh_c[j]);
                dz[j] = dc * gg * i * (T(1) - i);
                dz[H + j] = dc * C[j] * f * (T(1) - f);
                dz[2 * H + j] = dc * i * (T(1) - gg * gg);
                dz[3 * H + j] = dh * tanh_c[j] * o * (T(1) - o);
                if (gc) (*gc)[j] += dc * f;
            }
            if (auto* gb = tp.grad_if(ib))
                for (std::size_t r = 0; r < 4 * H; ++r) (*gb)[r] += dz[r];
            if (auto* gw = tp.grad_if(iw))
                for (std::size_t r = 0; r < 4 * H; ++r)
                    for (std::size_t j = 0; j < K; ++j) (*gw)[r * K + j] += dz[r] * in[j];
            auto* gx = tp.grad_if(ix);
            auto* gh = tp.grad_if(ih);
            if (gx || gh) {
                for (std::size_t r = 0; r < 4 * H; ++r) {
                    const T* wr = &W.data[r * K];
                    if (gx)
                        for (std::size_t j = 0; j < D; ++j) (*gx)[j] += dz[r] * wr[j];
                    if (gh)
                        for (std::size_t j = 0; j < H; ++j) (*gh)[j] += dz[r] * wr[D + j];
                }
            }
        });
}

template <class T>
Var<T> softmax(Var<T> x) {
    auto& t = *x.tape;
    const auto& X = t.value(x);
    detail::require(X.rank() == 1 && X.size() > 0, "softmax", "expected a non-empty vector, got " + X.shape_str());
    Tensor<T> y = X;
    const T mx = *std::max_element(y.data.begin(), y.data.end());
    T z = 0;
    for (auto& v : y.data) z += (v = std::exp(v - mx));
    for (auto& v : y.data) v /= z;
    const auto ix = x.id;
    return t.record(std::move(y), {x}, [ix](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        const auto& y = tp.value_of(self);
        auto& gx = *tp.grad_if(ix);
        T dot = 0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - dot);
    });
}

template <class T>
Var<T> softmax_xent_sparse(Var<T> logits, std::size_t target) {
    auto& t = *logits.tape;
    const auto& Z = t.value(logits);
    detail::require(Z.rank() == 1 && target < Z.size(), "softmax_xent_sparse",
                    "class " + std::to_string(target) + " for logits " + Z.shape_str());
    const T mx = *std::max_element(Z.data.begin(), Z.data.end());
    T s = 0;
    for (auto v : Z.data) s += std::exp(v - mx);
    const T lse = mx + std::log(s);
    const auto iz = logits.id;
    return t.record(Tensor<T>::scalar(lse - Z[target]), {logits}, [iz, target, lse](Tape<T>& tp, std::size_t self) {
        const T g = (*tp.grad_if(self))[0];
        const auto& Z = tp.value_of(iz);
        auto& gz = *tp.grad_if(iz);
        for (std::size_t i = 0; i < Z.size(); ++i) {
            gz[i] += g * (std::exp(Z[i] - lse) - (i == target ? T(1) : T(0)));
        }
    });
}

template <class T>
Var<T> sum(Var<T> x) {
    auto& t = *x.tape;
    const auto& X = t.value(x);
    T s = 0;
    for (auto v : X.data) s += v;
    const auto ix = x.id;
    return t.record(Tensor<T>::scalar(s), {x}, [ix](Tape<T>& tp, std::size_t self) {
        const T g = (*tp.grad_if(self))[0];
        auto& gx = *tp.grad_if(ix);
        for (auto& v : gx.data) v += g;
    });
}

template <class T>
Var<T> mean(Var<T> x) {
    const auto n = x.value().size();
    detail::require(n > 0, "mean", "empty tensor");
    return scale(sum(x), T(1) / static_cast<T>(n));
}

template <class T>
Var<T> add_n(const std::vector<Var<T>>& xs) {
    detail::require(!xs.empty(), "add_n", "no inputs");
    auto& t = *xs.front().tape;
    Tensor<T> out = t.value(xs.front());
    std::vector<std::size_t> ids{xs.front().id};
    for (std::size_t k = 1; k < xs.size(); ++k) {
        const auto& v = t.value(xs[k]);
        detail::require(v.shape == out.shape, "add_n", detail::shapes(out, v));
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
        ids.push_back(xs[k].id);
    }
    return t.record(std::move(out), xs, [ids](Tape<T>& tp, std::size_t self) {
        const auto& g = *tp.grad_if(self);
        for (auto id : ids)
            if (auto* gi = tp.grad_if(id))
                for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
    });
}

// Returns J itself when J >= b, which |J - b| + b only equals up to rounding.
template <class T>
T flood_value(T J, T b) {
    return J >= b ? J : std::abs(J - b) + b;
}

template <class T>
Var<T> flood(Var<T> J, T b) {
    if (!(b >= T(0))) throw NegativeFloodLevel(static_cast<double>(b));
    auto& t = *J.tape;
    const auto& v = t.value(J);
    detail::require(v.size() == 1, "flood", "loss must be a scalar, got " + v.shape_str());
    const T sign = v[0] >= b ? T(1) : T(-1);
    const auto ij = J.id;
    return t.record(Tensor<T>::scalar(flood_value(v[0], b)), {J}, [ij, sign](Tape<T>& tp, std::size_t self) {
        (*tp.grad_if(ij))[0] += sign * (*tp.grad_if(self))[0];
    });
}

}  // namespace offlang::ad
