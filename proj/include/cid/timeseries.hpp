#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cid/field.hpp"

namespace cid {

// Uniform samples t_j = j T/(M-1) on [0,T] (a single sample sits at t = 0).
struct TimeSeries {
    double t_final = 1.0;
    std::vector<Field> samples;

    int m() const { return static_cast<int>(samples.size()); }
    double dt() const { return m() > 1 ? t_final / (m() - 1) : 0.0; }
    double time(int j) const { return j * dt(); }
};

// 4th-order derivative on a uniform grid: centered inside, one-sided at the two ends
std::vector<double> fd_derivative(const std::vector<double>& y, double h);
TimeSeries fd_derivative(const TimeSeries& s);

// 4th-order centered derivative of a callable at t with step h
Field fd_at(const std::function<Field(double)>& f, double t, double h);
double fd_at(const std::function<double(double)>& f, double t, double h);

// piecewise quartic Lagrange interpolation of samples and its exact derivative
Field interp(const TimeSeries& s, double t);
Field interp_dt(const TimeSeries& s, double t);

// time mollification of a series with a normalized bump of half width ell (mean preserved)
TimeSeries mollify_time(const TimeSeries& s, double ell);

// binary snapshot: "CIDF", u32 version, u32 N, u32 M, u32 c, f64 T,
// then M*c half-spectra as little-endian (re, im) f64 pairs
void write_snapshot(const std::string& path, const TimeSeries& s);
TimeSeries read_snapshot(const std::string& path);
// a state file: the velocity record, optionally followed by the stress record on the same time grid
void write_state(const std::string& path, const TimeSeries& u, const std::optional<TimeSeries>& R);
std::pair<TimeSeries, std::optional<TimeSeries>> read_state(const std::string& path);

}  // namespace cid
