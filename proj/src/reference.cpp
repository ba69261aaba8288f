#include "otrank/reference.hpp"

#include "otrank/special_fn.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace otrank {

std::string_view to_string(NuTag tag) {
    switch (tag) {
        case NuTag::uniform_cube: return "uniform_cube";
        case NuTag::spherical_uniform: return "spherical_uniform";
        case NuTag::gaussian: return "gaussian";
        case NuTag::custom_iid: return "custom_iid";
    }
    return "unknown";
}

std::string_view to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::identity: return "identity";
        case ScoreKind::coord_gaussian_cdf: return "coord_gaussian_cdf";
        case ScoreKind::coord_gaussian_quantile: return "coord_gaussian_quantile";
        case ScoreKind::van_der_waerden: return "van_der_waerden";
    }
    return "unknown";
}

NuTag parse_nu_tag(std::string_view text) {
    if (text == "uniform_cube" || text == "uniform") return NuTag::uniform_cube;
    if (text == "spherical_uniform" || text == "spherical") return NuTag::spherical_uniform;
    if (text == "gaussian") return NuTag::gaussian;
    if (text == "custom_iid") return NuTag::custom_iid;
    throw std::invalid_argument("unknown reference distribution '" + std::string(text) + "'");
}

ScoreKind parse_score_kind(std::string_view text) {
    if (text == "identity") return ScoreKind::identity;
    if (text == "coord_gaussian_cdf") return ScoreKind::coord_gaussian_cdf;
    if (text == "coord_gaussian_quantile") return ScoreKind::coord_gaussian_quantile;
    if (text == "van_der_waerden" || text == "vdw") return ScoreKind::van_der_waerden;
    throw std::invalid_argument("unknown score function '" + std::string(text) + "'");
}

}  // namespace otrank

namespace otrank::reference {

namespace {

constexpr std::array<int, kMaxHaltonDim> kPrimes{
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

void check_size(int n, int d) {
    if (n < 1) throw std::invalid_argument("grid size must be at least 1");
    if (d < 1) throw std::invalid_argument("grid dimension must be at least 1");
    if (d > kMaxHaltonDim) {
        throw std::invalid_argument("Halton grids support at most 64 dimensions");
    }
}

Matrix halton_block(int n, int d) {
    Matrix pts(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) pts(i, k) = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[k]);
    return pts;
}

// Integral of sin^m over [0, phi] by the standard reduction formula.
double sin_power_integral(int m, double phi) {
    double even = phi;                 // I_0
    double odd = 1.0 - std::cos(phi);  // I_1
    if (m == 0) return even;
    if (m == 1) return odd;
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    double result = 0.0;
    double prev = (m % 2 == 0) ? even : odd;
    for (int k = (m % 2 == 0) ? 2 : 3; k <= m; k += 2) {
        result = -std::pow(s, k - 1) * c / k + (k - 1.0) / k * prev;
        prev = result;
    }
    return result;
}

// Solves F(phi) = u for the law on [0, pi] with density proportional to sin^m.
double inverse_sin_power_cdf(int m, double u) {
    if (m == 0) return std::numbers::pi * u;
    if (m == 1) return std::acos(1.0 - 2.0 * u);
    const double total = sin_power_integral(m, std::numbers::pi);
    double lo = 0.0;
    double hi = std::numbers::pi;
    double phi = std::numbers::pi * u;
    for (int iter = 0; iter < 200; ++iter) {
        const double f = sin_power_integral(m, phi) / total - u;
        if (f < 0.0) {
            lo = phi;
        } else {
            hi = phi;
        }
        if (std::abs(f) < 1e-15 || hi - lo < 1e-15) break;
        const double slope = std::pow(std::sin(phi), m) / total;
        double next = slope > 0.0 ? phi - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        phi = next;
    }
    return phi;
}

// Point on S^{d-1} from u in [0,1)^{d-1} via hyperspherical coordinates.
Vector sphere_point(const double* u, int d) {
    Vector x(d);
    if (d == 1) {
        x(0) = u[0] < 0.5 ? -1.0 : 1.0;
        return x;
    }
    double sin_prod = 1.0;
    for (int k = 0; k < d - 2; ++k) {
        const double phi = inverse_sin_power_cdf(d - 2 - k, u[k]);
        x(k) = sin_prod * std::cos(phi);
        sin_prod *= std::sin(phi);
    }
    const double last = 2.0 * std::numbers::pi * u[d - 2];
    x(d - 2) = sin_prod * std::cos(last);
    x(d - 1) = sin_prod * std::sin(last);
    return x;
}

Vector draw_point(NuTag nu, int d, Rng& rng) {
    Vector v(d);
    switch (nu) {
        case NuTag::uniform_cube: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (int k = 0; k < d; ++k) v(k) = unif(rng);
            return v;
        }
        case NuTag::gaussian: {
            std::normal_distribution<double> norm;
            for (int k = 0; k < d; ++k) v(k) = norm(rng);
            return v;
        }
        case NuTag::spherical_uniform: {
            std::normal_distribution<double> norm;
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            double r2 = 0.0;
            do {
                for (int k = 0; k < d; ++k) v(k) = norm(rng);
                r2 = v.squaredNorm();
            } while (r2 == 0.0);
            return v * (unif(rng) / std::sqrt(r2));
        }
        case NuTag::custom_iid: break;
    }
    throw std::invalid_argument("custom_iid grids require an explicit sampler");
}

std::optional<Matrix> closed_form_erd(NuTag nu, ScoreKind kind, int d) {
    const Matrix eye = Matrix::Identity(d, d);
    switch (nu) {
        case NuTag::uniform_cube:
            if (kind == ScoreKind::identity) return eye / 12.0;
            if (kind == ScoreKind::coord_gaussian_quantile) return eye;
            break;
        case NuTag::spherical_uniform:
            if (kind == ScoreKind::identity) return eye / (3.0 * d);
            if (kind == ScoreKind::van_der_waerden) return eye;
            break;
        case NuTag::gaussian:
            if (kind == ScoreKind::identity) return eye;
            if (kind == ScoreKind::coord_gaussian_cdf) return eye / 12.0;
            break;
        case NuTag::custom_iid: break;
    }
    return std::nullopt;
}

}  // namespace

double radical_inverse(std::uint64_t index, int base) {
    if (base < 2) throw std::invalid_argument("radical_inverse: base must be >= 2");
    const double inv_base = 1.0 / base;
    double factor = inv_base;
    double value = 0.0;
    while (index > 0) {
        value += static_cast<double>(index % static_cast<std::uint64_t>(base)) * factor;
        index /= static_cast<std::uint64_t>(base);
        factor *= inv_base;
    }
    return value;
}

ReferenceGrid halton_grid(int n, int d) {
    check_size(n, d);
    return {halton_block(n, d), NuTag::uniform_cube, std::nullopt};
}

ReferenceGrid regular_grid_1d(int n) {
    if (n < 1) throw std::invalid_argument("regular_grid_1d: N must be at least 1");
    Matrix pts(n, 1);
    for (int i = 0; i < n; ++i) pts(i, 0) = static_cast<double>(i + 1) / n;
    return {pts, NuTag::uniform_cube, std::nullopt};
}

ReferenceGrid spherical_uniform_grid(int n, int d, std::optional<std::uint64_t> seed,
                                     SphericalLayout* layout) {
    check_size(n, d);
    if (n < d + 1) throw std::invalid_argument("spherical_uniform_grid: N must be at least d + 1");

    SphericalLayout lay;
    if (d == 1) {
        lay.n_directions = 2;
        lay.n_radii = n / 2;
    } else {
        lay.n_radii = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
        while (lay.n_radii > 1 && n / lay.n_radii < 2) --lay.n_radii;
        lay.n_directions = n / lay.n_radii;
    }
    lay.n_leftover = n - lay.n_radii * lay.n_directions;
    while (lay.n_radii > 1 && lay.n_leftover > std::min(lay.n_radii, lay.n_directions)) {
        --lay.n_radii;
        lay.n_directions = n / lay.n_radii;
        lay.n_leftover = n - lay.n_radii * lay.n_directions;
    }
    if (lay.n_radii < 1 || lay.n_directions < 2 ||
        lay.n_leftover > std::min(lay.n_radii, lay.n_directions)) {
        lay.iid_fallback = true;
        if (layout) *layout = lay;
        ReferenceGrid g = iid_grid(n, d, NuTag::spherical_uniform, seed.value_or(0));
        return g;
    }

    const int ud = std::max(d - 1, 1);
    Matrix u(lay.n_directions, ud);
    if (d == 1) {
        for (int s = 0; s < lay.n_directions; ++s) u(s, 0) = s == 0 ? 0.75 : 0.25;
    } else {
        u = halton_block(lay.n_directions, ud);
        if (seed) {
            Rng rng = make_rng(*seed, 0x737068657265ULL);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (int k = 0; k < ud; ++k) {
                const double shift = unif(rng);
                for (int s = 0; s < lay.n_directions; ++s) {
                    const double v = u(s, k) + shift;
                    u(s, k) = v - std::floor(v);
                }
            }
        }
    }
    Matrix dirs(lay.n_directions, d);
    for (int s = 0; s < lay.n_directions; ++s) {
        const Eigen::RowVectorXd row = u.row(s);
        dirs.row(s) = sphere_point(row.data(), d).transpose();
    }

    Matrix pts(n, d);
    int row = 0;
    const double spacing = 1.0 / (lay.n_radii + 1.0);
    for (int j = 1; j <= lay.n_radii; ++j)
        for (int s = 0; s < lay.n_directions; ++s) pts.row(row++) = (j * spacing) * dirs.row(s);
    for (int s = 0; s < lay.n_leftover; ++s) pts.row(row++) = (0.5 * spacing) * dirs.row(s);

    if (layout) *layout = lay;
    return {pts, NuTag::spherical_uniform, seed};
}

ReferenceGrid gaussian_grid(int n, int d) {
    check_size(n, d);
    Matrix pts = halton_block(n, d);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = special::std_normal_quantile(pts.data()[i]);
    return {pts, NuTag::gaussian, std::nullopt};
}

ReferenceGrid iid_grid(int n, int d, NuTag nu, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("iid_grid: N and d must be positive");
    if (nu == NuTag::custom_iid) throw std::invalid_argument("custom_iid grids require an explicit sampler");
    Rng rng = make_rng(seed, 0x676964ULL);
    Matrix pts(n, d);
    for (int i = 0; i < n; ++i) pts.row(i) = draw_point(nu, d, rng).transpose();
    return {pts, nu, seed};
}

ReferenceGrid iid_grid(int n, int d, const PointSampler& sampler, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("iid_grid: N and d must be positive");
    Rng rng = make_rng(seed, 0x676964ULL);
    Matrix pts(n, d);
    for (int i = 0; i < n; ++i) {
        const Vector v = sampler(rng);
        if (v.size() != d || !v.allFinite()) throw std::invalid_argument("iid_grid: sampler returned an invalid point");
        pts.row(i) = v.transpose();
    }
    return {pts, NuTag::custom_iid, seed};
}

ReferenceGrid default_grid(NuTag nu, int n, int d, std::optional<std::uint64_t> seed) {
    switch (nu) {
        case NuTag::uniform_cube: return d == 1 ? regular_grid_1d(n) : halton_grid(n, d);
        case NuTag::spherical_uniform: return spherical_uniform_grid(n, d, seed);
        case NuTag::gaussian: return gaussian_grid(n, d);
        case NuTag::custom_iid: break;
    }
    throw std::invalid_argument("custom_iid grids require an explicit sampler");
}

void center_grid(ReferenceGrid& grid) {
    const Eigen::RowVectorXd mean = grid.points.colwise().mean();
    grid.points.rowwise() -= mean;
}

Vector apply_score(const ScoreFunction& score, const Vector& x) {
    if (x.size() != score.dim) throw std::invalid_argument("apply_score: dimension mismatch");
    if (!x.allFinite()) throw std::domain_error("apply_score: non-finite input");
    switch (score.kind) {
        case ScoreKind::identity: return x;
        case ScoreKind::coord_gaussian_cdf: return x.unaryExpr([](double v) { return special::std_normal_cdf(v); });
        case ScoreKind::coord_gaussian_quantile:
            return x.unaryExpr([](double v) { return special::std_normal_quantile(v); });
        case ScoreKind::van_der_waerden: {
            const double r = x.norm();
            if (r == 0.0) return Vector::Zero(x.size());
            if (r >= 1.0) throw std::domain_error("van_der_waerden score requires ||x|| < 1");
            return x * (special::chi_d_quantile(score.dim, r) / r);
        }
    }
    throw std::invalid_argument("apply_score: unknown score");
}

Matrix apply_score_rows(const ScoreFunction& score, const Matrix& points) {
    if (score.kind == ScoreKind::identity) {
        if (points.cols() != score.dim) throw std::invalid_argument("apply_score: dimension mismatch");
        return points;
    }
    Matrix out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out.row(i) = apply_score(score, points.row(i).transpose()).transpose();
    return out;
}

ErdSpec erd_covariance(NuTag nu, const ScoreFunction& score, const ErdOptions& options) {
    const int d = score.dim;
    if (d < 1) throw std::invalid_argument("erd_covariance: dimension must be positive");
    ErdSpec spec;
    if (auto closed = closed_form_erd(nu, score.kind, d)) {
        spec.sigma_erd = *closed;
        return spec;
    }
    if (!options.allow_monte_carlo) {
        throw std::invalid_argument("no closed-form ERD covariance for (" + std::string(to_string(nu)) + ", " +
                                    std::string(to_string(score.kind)) +
                                    "); request a Monte Carlo estimate explicitly");
    }
    if (options.mc_draws < 100) throw std::invalid_argument("erd_covariance: too few Monte Carlo draws");

    Rng rng = make_rng(options.seed, 0x657264ULL);
    Matrix draws(options.mc_draws, d);
    for (int i = 0; i < options.mc_draws; ++i) {
        draws.row(i) = apply_score(score, draw_point(nu, d, rng)).transpose();
    }
    const Eigen::RowVectorXd mean = draws.colwise().mean();
    const Matrix centered = draws.rowwise() - mean;
    const double n = options.mc_draws;
    spec.sigma_erd = centered.transpose() * centered / (n - 1.0);
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
        for (int k = j; k < d; ++k) {
            const Vector prod = centered.col(j).cwiseProduct(centered.col(k));
            const double var = (prod.array() - prod.mean()).square().sum() / (n - 1.0);
            worst = std::max(worst, std::sqrt(var / n));
        }
    }
    spec.closed_form = false;
    spec.std_error = worst;
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(spec.sigma_erd).eigenvalues().minCoeff();
    if (!(min_eig > 0.0)) throw std::invalid_argument("ERD covariance is not positive definite");
    return spec;
}

std::string grid_to_csv(const ReferenceGrid& grid) {
    std::string out = "dim=" + std::to_string(grid.dim()) + ",nu=" + std::string(to_string(grid.nu)) + ",seed=";
    if (grid.seed) out += std::to_string(*grid.seed);
    out += '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        for (Eigen::Index k = 0; k < grid.dim(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", grid.points(i, k));
            if (k > 0) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

ReferenceGrid grid_from_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("grid CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    int dim = 0;
    std::optional<NuTag> nu;
    std::optional<std::uint64_t> seed;
    std::istringstream header(line);
    std::string field;
    while (std::getline(header, field, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("grid CSV: malformed header field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "dim") {
            dim = std::stoi(value);
        } else if (key == "nu") {
            nu = parse_nu_tag(value);
        } else if (key == "seed") {
            if (!value.empty()) seed = std::stoull(value);
        } else {
            throw std::invalid_argument("grid CSV: unknown header key '" + key + "'");
        }
    }
    if (dim < 1 || !nu) throw std::invalid_argument("grid CSV: header needs dim and nu");

    std::vector<double> values;
    int rows = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        int count = 0;
        while (std::getline(row, field, ',')) {
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0' || !std::isfinite(v)) {
                throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + ": bad number '" + field + "'");
            }
            values.push_back(v);
            ++count;
        }
        if (count != dim) {
            throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(dim) + " values");
        }
        ++rows;
    }
    if (rows == 0) throw std::invalid_argument("grid CSV: no points");
    ReferenceGrid grid;
    grid.points = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), rows, dim);
    grid.nu = *nu;
    grid.seed = seed;
    return grid;
}

std::uint64_t fingerprint(const ReferenceGrid& grid) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : grid_to_csv(grid)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace otrank::reference
