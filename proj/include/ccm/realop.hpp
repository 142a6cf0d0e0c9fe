#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "ccm/fft.hpp"

namespace ccm {

// g -> A g + B conj(g).
struct RealLinearOperator {
    Mat a;
    Mat b;

    int size() const { return static_cast<int>(a.rows()); }

    static RealLinearOperator identity(int n) { return {Mat::Identity(n, n), Mat::Zero(n, n)}; }
    static RealLinearOperator zero(int n) { return {Mat::Zero(n, n), Mat::Zero(n, n)}; }

    Vec apply(const Vec& g) const { return a * g + b * g.conjugate(); }

    // Action on stacked (Re g, Im g).
    RMat to_real() const {
        const int n = size();
        Mat p = a + b, m = a - b;
        RMat r(2 * n, 2 * n);
        r.topLeftCorner(n, n) = p.real();
        r.topRightCorner(n, n) = -m.imag();
        r.bottomLeftCorner(n, n) = p.imag();
        r.bottomRightCorner(n, n) = m.real();
        return r;
    }

    static RealLinearOperator from_real(const RMat& r) {
        const int n = static_cast<int>(r.rows()) / 2;
        RMat r11 = r.topLeftCorner(n, n), r12 = r.topRightCorner(n, n);
        RMat r21 = r.bottomLeftCorner(n, n), r22 = r.bottomRightCorner(n, n);
        const cplx I(0.0, 1.0);
        Mat a = 0.5 * ((r11 + r22).cast<cplx>() + I * (r21 - r12).cast<cplx>());
        Mat b = 0.5 * ((r11 - r22).cast<cplx>() + I * (r21 + r12).cast<cplx>());
        return {a, b};
    }

    // (this o other) g
    RealLinearOperator compose(const RealLinearOperator& o) const {
        return {a * o.a + b * o.b.conjugate(), a * o.b + b * o.a.conjugate()};
    }

    RealLinearOperator operator+(const RealLinearOperator& o) const { return {a + o.a, b + o.b}; }
    RealLinearOperator operator-(const RealLinearOperator& o) const { return {a - o.a, b - o.b}; }
    RealLinearOperator scaled(cplx c) const { return {c * a, c * b}; }

    RealLinearOperator inverse() const {
        Eigen::FullPivLU<RMat> lu(to_real());
        if (!lu.isInvertible()) throw std::runtime_error("real-linear operator is singular");
        return from_real(lu.inverse());
    }

    // Frobenius norm of the real representation.
    double norm() const { return to_real().norm(); }

    // Columns from an action on basis vectors e_k and i e_k.
    static RealLinearOperator assemble(int n, const std::function<Vec(const Vec&)>& op) {
        RealLinearOperator r{Mat(n, n), Mat(n, n)};
        const cplx I(0.0, 1.0);
        for (int k = 0; k < n; ++k) {
            Vec e = Vec::Zero(n);
            e[k] = 1.0;
            Vec u = op(e);
            Vec v = op(I * e);
            r.a.col(k) = 0.5 * (u - I * v);
            r.b.col(k) = 0.5 * (u + I * v);
        }
        return r;
    }
};

inline RVec singular_values(const RealLinearOperator& op) {
    Eigen::BDCSVD<RMat> svd(op.to_real());
    return svd.singularValues();
}

} // namespace ccm
