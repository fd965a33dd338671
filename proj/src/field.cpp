#include "nsrlab/field.hpp"

#include <algorithm>
#include <cmath>

namespace nsr {

void Lattice::validate() const {
    if (n_space < 3 || n_space % 2 == 0)
        throw std::invalid_argument("lattice: n_space must be odd and >= 3");
    if (n_time < 1) throw std::invalid_argument("lattice: n_time must be >= 1");
    if (n_time > 1 && !(T > 0.0)) throw std::invalid_argument("lattice: T must be positive");
}

FourierField::FourierField(const Lattice& lat, int components) : lat_(lat), ncomp_(components) {
    lat_.validate();
    if (components != 1 && components != 3 && components != 6)
        throw std::invalid_argument("field: components must be 1, 3 or 6");
    data_.assign(static_cast<std::size_t>(components) * lat.n_time * lat.modes(), cplx(0.0, 0.0));
}

cplx FourierField::mode(int c, int t, int k1, int k2, int k3) const {
    const int K = lat_.K();
    if (std::abs(k1) > K || std::abs(k2) > K || std::abs(k3) > K) return {0.0, 0.0};
    if (k3 < 0) return std::conj(slab(c, t)[idx(-k1, -k2, -k3)]);
    return slab(c, t)[idx(k1, k2, k3)];
}

void FourierField::set_mode(int c, int t, int k1, int k2, int k3, cplx value) {
    const int K = lat_.K();
    if (std::abs(k1) > K || std::abs(k2) > K || std::abs(k3) > K)
        throw std::out_of_range("field: mode outside lattice");
    if (k3 < 0) {
        k1 = -k1; k2 = -k2; k3 = -k3;
        value = std::conj(value);
    }
    cplx* s = slab(c, t);
    if (k3 == 0) {
        if (k1 == 0 && k2 == 0) value = cplx(value.real(), 0.0);
        s[idx(-k1, -k2, 0)] = std::conj(value);
    }
    s[idx(k1, k2, k3)] = value;
}

void FourierField::add_mode(int c, int t, int k1, int k2, int k3, cplx value) {
    if (k3 < 0) {
        k1 = -k1; k2 = -k2; k3 = -k3;
        value = std::conj(value);
    }
    if (k3 == 0 && k1 == 0 && k2 == 0) {
        slab(c, t)[idx(0, 0, 0)] += cplx(value.real(), 0.0);
        return;
    }
    set_mode(c, t, k1, k2, k3, mode(c, t, k1, k2, k3) + value);
}

void require_same_lattice(const FourierField& a, const FourierField& b, const char* where) {
    if (a.lattice() != b.lattice() || a.components() != b.components())
        throw std::invalid_argument(std::string(where) + ": shape mismatch");
}

FourierField& FourierField::operator+=(const FourierField& o) {
    require_same_lattice(*this, o, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    mean_free = mean_free && o.mean_free;
    trace_free = trace_free && o.trace_free;
    return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
    require_same_lattice(*this, o, "subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    mean_free = mean_free && o.mean_free;
    trace_free = trace_free && o.trace_free;
    return *this;
}

FourierField& FourierField::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(double s, FourierField a) { return a *= s; }

FourierField FourierField::time_slice(int t) const {
    Lattice l = lat_;
    l.n_time = 1;
    l.T = 0.0;
    FourierField out(l, ncomp_);
    for (int c = 0; c < ncomp_; ++c)
        std::copy(slab(c, t), slab(c, t) + slab_size(), out.slab(c, 0));
    out.mean_free = mean_free;
    out.trace_free = trace_free;
    return out;
}

void FourierField::set_time_slice(int t, const FourierField& s) {
    if (s.components() != ncomp_ || s.lattice().n_space != lat_.n_space)
        throw std::invalid_argument("set_time_slice: shape mismatch");
    for (int c = 0; c < ncomp_; ++c)
        std::copy(s.slab(c, 0), s.slab(c, 0) + slab_size(), slab(c, t));
}

FourierField FourierField::component(int c) const {
    FourierField out(lat_, 1);
    for (int t = 0; t < lat_.n_time; ++t)
        std::copy(slab(c, t), slab(c, t) + slab_size(), out.slab(0, t));
    out.mean_free = mean_free;
    return out;
}

void FourierField::set_component(int c, const FourierField& f) {
    if (f.components() != 1 || f.lattice() != lat_)
        throw std::invalid_argument("set_component: shape mismatch");
    for (int t = 0; t < lat_.n_time; ++t)
        std::copy(f.slab(0, t), f.slab(0, t) + slab_size(), slab(c, t));
}

FourierField resample(const FourierField& f, int n_space) {
    Lattice lat = f.lattice();
    lat.n_space = n_space;
    lat.validate();
    FourierField out(lat, f.components());
    out.mean_free = f.mean_free;
    out.trace_free = f.trace_free;
    const int K = std::min(lat.K(), f.lattice().K());
    for (int c = 0; c < f.components(); ++c)
        for (int t = 0; t < lat.n_time; ++t) {
            const cplx* src = f.slab(c, t);
            cplx* dst = out.slab(c, t);
            for (int k1 = -K; k1 <= K; ++k1)
                for (int k2 = -K; k2 <= K; ++k2)
                    for (int k3 = 0; k3 <= K; ++k3) dst[out.idx(k1, k2, k3)] = src[f.idx(k1, k2, k3)];
        }
    return out;
}

}  // namespace nsr
