#pragma once
// Transforms between lattice half spectra and physical grids of size M^3.

#include <cstddef>
#include <memory>

#include "nsrlab/field.hpp"

namespace nsr {

// Smallest integer >= m whose prime factors are all in {2, 3, 5, 7}.
int fft_size_at_least(int m);

// fftw_malloc-backed buffer for one M^3 physical grid plus its r2c spectrum.
class GridBuffer {
public:
    explicit GridBuffer(int M);
    ~GridBuffer();
    GridBuffer(const GridBuffer&) = delete;
    GridBuffer& operator=(const GridBuffer&) = delete;
    GridBuffer(GridBuffer&& o) noexcept;

    int M() const { return M_; }
    std::size_t points() const { return static_cast<std::size_t>(M_) * M_ * M_; }
    std::size_t spec_points() const { return static_cast<std::size_t>(M_) * M_ * (M_ / 2 + 1); }
    double* real() { return real_; }
    const double* real() const { return real_; }
    cplx* spec() { return spec_; }

private:
    int M_;
    double* real_ = nullptr;
    cplx* spec_ = nullptr;
};

// Values of component c at time sample t on the M^3 grid x_j = 2*pi*j/M.
void to_physical(const FourierField& f, int c, int t, GridBuffer& buf);
// Replace component c at time t by the lattice part of the grid values in buf.real().
// Returns the discarded energy (L^2 norm squared of the modes outside the lattice).
// buf.real() is preserved.
double from_physical(GridBuffer& buf, FourierField& f, int c, int t);

}  // namespace nsr
