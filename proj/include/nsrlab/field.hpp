#pragma once
// Real-valued periodic fields on the 2*pi torus stored as Hermitian half spectra.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsr {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTorusVolume = 8.0 * kPi * kPi * kPi;

struct Lattice {
    int n_space = 3;   // odd, modes -K..K per axis
    int n_time = 1;    // uniform samples on [0, T]
    double T = 0.0;

    int K() const { return (n_space - 1) / 2; }
    int half() const { return K() + 1; }
    std::size_t modes() const {
        return static_cast<std::size_t>(n_space) * n_space * half();
    }
    double dt() const { return n_time > 1 ? T / (n_time - 1) : 0.0; }
    double time(int j) const { return j * dt(); }
    void validate() const;
    bool operator==(const Lattice& o) const {
        return n_space == o.n_space && n_time == o.n_time && T == o.T;
    }
    bool operator!=(const Lattice& o) const { return !(*this == o); }
};

// Upper-triangular storage of a symmetric 3x3 tensor.
inline int sym_index(int i, int j) {
    if (i > j) std::swap(i, j);
    static const int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return table[i][j];
}
inline bool sym_is_diagonal(int c) { return c == 0 || c == 3 || c == 5; }

// Storage index <-> signed frequency along a full axis of length n.
inline int freq_of(int i, int n) { return i <= (n - 1) / 2 ? i : i - n; }
inline int index_of(int k, int n) { return k >= 0 ? k : k + n; }

class FourierField {
public:
    FourierField() = default;
    FourierField(const Lattice& lat, int components);

    const Lattice& lattice() const { return lat_; }
    int components() const { return ncomp_; }
    bool empty() const { return data_.empty(); }

    std::size_t slab_size() const { return lat_.modes(); }
    cplx* slab(int c, int t) { return data_.data() + offset(c, t); }
    const cplx* slab(int c, int t) const { return data_.data() + offset(c, t); }

    // Index inside a slab for stored mode (k1, k2, k3) with k3 >= 0.
    std::size_t idx(int k1, int k2, int k3) const {
        const int n = lat_.n_space;
        return (static_cast<std::size_t>(index_of(k1, n)) * n + index_of(k2, n)) * lat_.half() + k3;
    }

    // Any mode in -K..K^3; negative k3 reads the conjugate partner.
    cplx mode(int c, int t, int k1, int k2, int k3) const;
    // Writes k and keeps the conjugate partner consistent.
    void set_mode(int c, int t, int k1, int k2, int k3, cplx value);
    void add_mode(int c, int t, int k1, int k2, int k3, cplx value);

    std::vector<cplx>& raw() { return data_; }
    const std::vector<cplx>& raw() const { return data_; }

    bool mean_free = false;
    bool trace_free = false;

    FourierField& operator+=(const FourierField& o);
    FourierField& operator-=(const FourierField& o);
    FourierField& operator*=(double s);

    // Time slice t as a single-sample field on the same spatial lattice.
    FourierField time_slice(int t) const;
    void set_time_slice(int t, const FourierField& slice);
    FourierField component(int c) const;
    void set_component(int c, const FourierField& f);

private:
    std::size_t offset(int c, int t) const {
        return (static_cast<std::size_t>(c) * lat_.n_time + t) * lat_.modes();
    }
    Lattice lat_;
    int ncomp_ = 0;
    std::vector<cplx> data_;
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(double s, FourierField a);

// Visit every stored mode: fn(index, k1, k2, k3) with k3 >= 0.
template <class Fn>
void for_each_mode(const Lattice& lat, Fn&& fn) {
    const int n = lat.n_space, h = lat.half();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < n; ++i1) {
        const int k1 = freq_of(i1, n);
        for (int i2 = 0; i2 < n; ++i2) {
            const int k2 = freq_of(i2, n);
            for (int k3 = 0; k3 < h; ++k3, ++idx) fn(idx, k1, k2, k3);
        }
    }
}

// Parseval weight of a stored half-spectrum mode.
inline double half_weight(int k3) { return k3 == 0 ? 1.0 : 2.0; }

// Same field on a lattice with a different odd n_space: modes outside the
// smaller cube are dropped, new modes are zero.
FourierField resample(const FourierField& f, int n_space);

void require_same_lattice(const FourierField& a, const FourierField& b, const char* where);

}  // namespace nsr
