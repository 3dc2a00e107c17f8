#include "cid/timeseries.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace cid {

namespace {

// rows: weights for f0..f4 giving f'(x_r) at node r of five equispaced nodes, times 12h
constexpr double kOneSided[3][5] = {
    {-25, 48, -36, 16, -3},
    {-3, -10, 18, -6, 1},
    {1, -8, 0, 8, -1},
};

template <class T>
T combine(const std::vector<const T*>& v, const double* w) {
    T r = *v[0];
    r *= w[0];
    for (std::size_t i = 1; i < v.size(); ++i) r += w[i] * *v[i];
    return r;
}

}  // namespace

std::vector<double> fd_derivative(const std::vector<double>& y, double h) {
    const int m = static_cast<int>(y.size());
    if (m < 5) throw Error(ErrorKind::InvalidParameter, "4th-order differences need >= 5 samples");
    std::vector<double> d(m);
    for (int j = 0; j < m; ++j) {
        double s = 0;
        if (j >= 2 && j <= m - 3) {
            for (int q = 0; q < 5; ++q) s += kOneSided[2][q] * y[j - 2 + q];
        } else if (j < 2) {
            for (int q = 0; q < 5; ++q) s += kOneSided[j][q] * y[q];
        } else {
            int r = m - 1 - j;  // mirrored stencil, sign flips
            for (int q = 0; q < 5; ++q) s -= kOneSided[r][q] * y[m - 1 - q];
        }
        d[j] = s / (12.0 * h);
    }
    return d;
}

TimeSeries fd_derivative(const TimeSeries& s) {
    const int m = s.m();
    if (m < 5) throw Error(ErrorKind::InvalidParameter, "4th-order differences need >= 5 samples");
    const double h = s.dt();
    TimeSeries d{s.t_final, {}};
    d.samples.reserve(m);
    for (int j = 0; j < m; ++j) {
        double w[5];
        std::vector<const Field*> v(5);
        if (j >= 2 && j <= m - 3) {
            for (int q = 0; q < 5; ++q) { w[q] = kOneSided[2][q]; v[q] = &s.samples[j - 2 + q]; }
        } else if (j < 2) {
            for (int q = 0; q < 5; ++q) { w[q] = kOneSided[j][q]; v[q] = &s.samples[q]; }
        } else {
            int r = m - 1 - j;
            for (int q = 0; q < 5; ++q) { w[q] = -kOneSided[r][q]; v[q] = &s.samples[m - 1 - q]; }
        }
        for (double& x : w) x /= 12.0 * h;
        d.samples.push_back(combine(v, w));
    }
    return d;
}

Field fd_at(const std::function<Field(double)>& f, double t, double h) {
    Field r = f(t + 2 * h);
    r *= -1.0;
    r.axpy(8.0, f(t + h));
    r.axpy(-8.0, f(t - h));
    r += f(t - 2 * h);
    r *= 1.0 / (12.0 * h);
    return r;
}

double fd_at(const std::function<double(double)>& f, double t, double h) {
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12.0 * h);
}

namespace {

void lagrange(const TimeSeries& s, double t, int& j0, double* w, double* dw) {
    const int m = s.m();
    const int np = std::min(5, m);
    const double h = s.dt();
    if (m == 1) { j0 = 0; w[0] = 1; dw[0] = 0; return; }
    int c = static_cast<int>(std::floor(t / h));
    j0 = std::clamp(c - np / 2 + (np % 2 == 0 ? 1 : 0), 0, m - np);
    for (int a = 0; a < np; ++a) {
        double xa = s.time(j0 + a), la = 1, dl = 0;
        for (int b = 0; b < np; ++b) {
            if (b == a) continue;
            double xb = s.time(j0 + b);
            la *= (t - xb) / (xa - xb);
        }
        for (int b = 0; b < np; ++b) {
            if (b == a) continue;
            double term = 1.0 / (xa - s.time(j0 + b));
            for (int e = 0; e < np; ++e) {
                if (e == a || e == b) continue;
                double xe = s.time(j0 + e);
                term *= (t - xe) / (xa - xe);
            }
            dl += term;
        }
        w[a] = la;
        dw[a] = dl;
    }
}

}  // namespace

Field interp(const TimeSeries& s, double t) {
    int j0;
    double w[5], dw[5];
    lagrange(s, t, j0, w, dw);
    int np = std::min(5, s.m());
    Field r = s.samples[j0];
    r *= w[0];
    for (int a = 1; a < np; ++a) r.axpy(w[a], s.samples[j0 + a]);
    return r;
}

Field interp_dt(const TimeSeries& s, double t) {
    int j0;
    double w[5], dw[5];
    lagrange(s, t, j0, w, dw);
    int np = std::min(5, s.m());
    Field r = s.samples[j0];
    r *= dw[0];
    for (int a = 1; a < np; ++a) r.axpy(dw[a], s.samples[j0 + a]);
    return r;
}

TimeSeries mollify_time(const TimeSeries& s, double ell) {
    if (!(ell > 0)) throw Error(ErrorKind::InvalidParameter, "time mollifier scale must be positive");
    const int m = s.m();
    const double h = s.dt();
    TimeSeries out{s.t_final, {}};
    if (m < 2) return s;
    int half = std::max(1, static_cast<int>(std::ceil(ell / h)));
    for (int j = 0; j < m; ++j) {
        double wsum = 0;
        Field acc(s.samples[0].n(), s.samples[0].comps());
        for (int q = -half; q <= half; ++q) {
            int jj = j + q;
            if (jj < 0 || jj >= m) continue;
            double r = q * h / ell;
            double w = std::abs(r) < 1 ? std::exp(1.0 / (r * r - 1.0)) : 0.0;
            acc.axpy(w, s.samples[jj]);
            wsum += w;
        }
        if (wsum <= 0) acc = s.samples[j];
        else acc *= 1.0 / wsum;
        out.samples.push_back(std::move(acc));
    }
    return out;
}

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

template <class T>
void put(std::ostream& o, T v) { o.write(reinterpret_cast<const char*>(&v), sizeof(T)); }
template <class T>
T get(std::istream& i) {
    T v{};
    i.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!i) throw Error(ErrorKind::IoError, "truncated snapshot");
    return v;
}

}  // namespace

namespace {

void write_record(std::ostream& o, const TimeSeries& s) {
    if (s.samples.empty()) throw Error(ErrorKind::InvalidParameter, "empty time series");
    o.write("CIDF", 4);
    put<std::uint32_t>(o, 1);
    put<std::uint32_t>(o, s.samples[0].n());
    put<std::uint32_t>(o, s.m());
    put<std::uint32_t>(o, s.samples[0].comps());
    put<double>(o, s.t_final);
    for (const auto& f : s.samples)
        o.write(reinterpret_cast<const char*>(f.data().data()), f.data().size() * sizeof(cplx));
}

TimeSeries read_record(std::istream& i) {
    char magic[4];
    i.read(magic, 4);
    if (!i || std::memcmp(magic, "CIDF", 4) != 0) throw Error(ErrorKind::IoError, "bad snapshot magic");
    auto ver = get<std::uint32_t>(i);
    if (ver != 1) throw Error(ErrorKind::IoError, "unsupported snapshot version");
    int n = static_cast<int>(get<std::uint32_t>(i));
    int m = static_cast<int>(get<std::uint32_t>(i));
    int c = static_cast<int>(get<std::uint32_t>(i));
    TimeSeries s;
    s.t_final = get<double>(i);
    for (int j = 0; j < m; ++j) {
        Field f(n, c);
        i.read(reinterpret_cast<char*>(f.data().data()), f.data().size() * sizeof(cplx));
        if (!i) throw Error(ErrorKind::IoError, "truncated snapshot");
        s.samples.push_back(std::move(f));
    }
    return s;
}

}  // namespace

void write_snapshot(const std::string& path, const TimeSeries& s) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw Error(ErrorKind::IoError, "cannot open " + path);
    write_record(o, s);
    if (!o) throw Error(ErrorKind::IoError, "write failed: " + path);
}

TimeSeries read_snapshot(const std::string& path) {
    std::ifstream i(path, std::ios::binary);
    if (!i) throw Error(ErrorKind::IoError, "cannot open " + path);
    return read_record(i);
}

void write_state(const std::string& path, const TimeSeries& u, const std::optional<TimeSeries>& R) {
    if (R && (R->m() != u.m() || R->t_final != u.t_final))
        throw Error(ErrorKind::InvalidParameter, "u and R must share the time grid");
    std::ofstream o(path, std::ios::binary);
    if (!o) throw Error(ErrorKind::IoError, "cannot open " + path);
    write_record(o, u);
    if (R) write_record(o, *R);
    if (!o) throw Error(ErrorKind::IoError, "write failed: " + path);
}

std::pair<TimeSeries, std::optional<TimeSeries>> read_state(const std::string& path) {
    std::ifstream i(path, std::ios::binary);
    if (!i) throw Error(ErrorKind::IoError, "cannot open " + path);
    TimeSeries u = read_record(i);
    if (u.samples[0].comps() != 3) throw Error(ErrorKind::IoError, "the first record of a state must be a velocity");
    if (i.peek() == std::char_traits<char>::eof()) return {u, std::nullopt};
    TimeSeries R = read_record(i);
    if (R.samples[0].comps() != 9 || R.m() != u.m()) throw Error(ErrorKind::IoError, "the second record must be a matching stress");
    return {u, R};
}

}  // namespace cid
