#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>
#include <fftw3.h>

namespace ccm {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// One in-place buffer with a forward and a backward plan. Plans are created
// under a global lock (the FFTW planner is not reentrant); execution uses the
// per-thread buffer only.
class FftPlan {
public:
    explicit FftPlan(int n) : n_(n) {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        buf_ = fftw_alloc_complex(n);
        fwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPlan() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    // out_k = sum_j in_j e^{-2 pi i jk/n}
    void forward(const Vec& in, Vec& out) { run(fwd_, in, out); }
    // out_j = sum_k in_k e^{+2 pi i jk/n}
    void backward(const Vec& in, Vec& out) { run(bwd_, in, out); }

private:
    void run(fftw_plan p, const Vec& in, Vec& out) {
        auto* b = reinterpret_cast<cplx*>(buf_);
        for (int i = 0; i < n_; ++i) b[i] = i < in.size() ? in[i] : cplx{};
        fftw_execute(p);
        out.resize(n_);
        for (int i = 0; i < n_; ++i) out[i] = b[i];
    }

    int n_;
    fftw_complex* buf_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

inline FftPlan& plan_for(int n) {
    thread_local std::map<int, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlan>(n);
    return *slot;
}

} // namespace detail

// Unnormalized transforms; inputs shorter than n are zero-padded.
inline Vec fft_forward(const Vec& in, int n) {
    Vec out;
    detail::plan_for(n).forward(in, out);
    return out;
}

inline Vec fft_backward(const Vec& in, int n) {
    Vec out;
    detail::plan_for(n).backward(in, out);
    return out;
}

} // namespace ccm
