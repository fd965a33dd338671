#include "nsrlab/fft.hpp"

#include <fftw3.h>

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <map>
#include <mutex>
#include <new>
#include <utility>

namespace nsr {

int fft_size_at_least(int m) {
    for (int s = std::max(m, 1);; ++s) {
        int r = s;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return s;
    }
}

namespace {

struct Plans {
    fftw_plan forward = nullptr;   // r2c
    fftw_plan backward = nullptr;  // c2r
};

std::mutex g_plan_mu;
std::map<int, Plans> g_plans;

Plans get_plans(int M) {
    std::lock_guard<std::mutex> lk(g_plan_mu);
    auto it = g_plans.find(M);
    if (it != g_plans.end()) return it->second;
    const std::size_t n = static_cast<std::size_t>(M) * M * M;
    const std::size_t h = static_cast<std::size_t>(M) * M * (M / 2 + 1);
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(h);
    Plans p;
    p.forward = fftw_plan_dft_r2c_3d(M, M, M, r, c, FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r_3d(M, M, M, c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
    if (!p.forward || !p.backward) throw std::runtime_error("fftw: plan creation failed");
    g_plans[M] = p;
    return p;
}

}  // namespace

GridBuffer::GridBuffer(int M) : M_(M) {
    real_ = fftw_alloc_real(points());
    spec_ = reinterpret_cast<cplx*>(fftw_alloc_complex(spec_points()));
    if (!real_ || !spec_) throw std::bad_alloc();
}

GridBuffer::~GridBuffer() {
    if (real_) fftw_free(real_);
    if (spec_) fftw_free(spec_);
}

GridBuffer::GridBuffer(GridBuffer&& o) noexcept : M_(o.M_), real_(o.real_), spec_(o.spec_) {
    o.real_ = nullptr;
    o.spec_ = nullptr;
}

void to_physical(const FourierField& f, int c, int t, GridBuffer& buf) {
    const Lattice& lat = f.lattice();
    const int M = buf.M(), n = lat.n_space, h = lat.half(), Mh = M / 2 + 1;
    if (M < n) throw std::invalid_argument("to_physical: grid smaller than lattice");
    Plans p = get_plans(M);
    cplx* s = buf.spec();
    std::memset(static_cast<void*>(s), 0, sizeof(cplx) * buf.spec_points());
    const cplx* src = f.slab(c, t);
    for (int i1 = 0; i1 < n; ++i1) {
        const int j1 = index_of(freq_of(i1, n), M);
        for (int i2 = 0; i2 < n; ++i2) {
            const int j2 = index_of(freq_of(i2, n), M);
            const cplx* row = src + (static_cast<std::size_t>(i1) * n + i2) * h;
            cplx* dst = s + (static_cast<std::size_t>(j1) * M + j2) * Mh;
            std::memcpy(static_cast<void*>(dst), row, sizeof(cplx) * h);
        }
    }
    fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(s), buf.real());
}

double from_physical(GridBuffer& buf, FourierField& f, int c, int t) {
    const Lattice& lat = f.lattice();
    const int M = buf.M(), n = lat.n_space, h = lat.half(), K = lat.K(), Mh = M / 2 + 1;
    if (M < n) throw std::invalid_argument("from_physical: grid smaller than lattice");
    Plans p = get_plans(M);
    // out-of-place r2c leaves the real input untouched
    fftw_execute_dft_r2c(p.forward, buf.real(), reinterpret_cast<fftw_complex*>(buf.spec()));
    const double scale = 1.0 / (static_cast<double>(M) * M * M);
    cplx* s = buf.spec();
    cplx* dst = f.slab(c, t);
    double lost = 0.0;
    for (int j1 = 0; j1 < M; ++j1) {
        const int k1 = freq_of(j1, M);
        for (int j2 = 0; j2 < M; ++j2) {
            const int k2 = freq_of(j2, M);
            const cplx* row = s + (static_cast<std::size_t>(j1) * M + j2) * Mh;
            const bool inside12 = std::abs(k1) <= K && std::abs(k2) <= K;
            for (int j3 = 0; j3 < Mh; ++j3) {
                const cplx v = row[j3] * scale;
                const bool self_conj = (j3 == 0) || (M % 2 == 0 && j3 == M / 2);
                if (inside12 && j3 <= K) {
                    dst[(static_cast<std::size_t>(index_of(k1, n)) * n + index_of(k2, n)) * h + j3] = v;
                } else {
                    lost += (self_conj ? 1.0 : 2.0) * std::norm(v);
                }
            }
        }
    }
    return lost * kTorusVolume;
}

}  // namespace nsr
