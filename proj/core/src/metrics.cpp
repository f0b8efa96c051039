#include "spotlight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "spotlight/error.hpp"
#include "spotlight/rng.hpp"

namespace spotlight {

double psnr_from_rmse(double rmse) noexcept {
    if (rmse < 1e-5) {
        return kPsnrCap;
    }
    return std::min(kPsnrCap, 20.0 * std::log10(1.0 / rmse));
}

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> k(size);
    const int r = size / 2;
    double total = 0.0;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-0.5 * (i - r) * (i - r) / (sigma * sigma));
        total += k[i];
    }
    for (double& v : k) {
        v /= total;
    }
    return k;
}

// 'valid' separable filtering of a single plane.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
    const int size = static_cast<int>(k.size());
    const int ow = w - size + 1;
    const int oh = h - size + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < size; ++i) {
                acc += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
            }
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < size; ++i) {
                acc += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
            }
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

double mean_ssim(const PixelMap& a, const PixelMap& b, const MaskMap* mask, const SsimOptions& opt) {
    const int w = a.width();
    const int h = a.height();
    int size = std::min({opt.window, w, h});
    if (size % 2 == 0) {
        --size;
    }
    const auto k = gaussian_window(size, opt.sigma);
    const int r = size / 2;
    const int ow = w - size + 1;
    const int oh = h - size + 1;
    const double c1 = opt.k1 * opt.k1;
    const double c2 = opt.k2 * opt.k2;

    double total = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < a.channels(); ++c) {
        std::vector<double> pa(a.pixel_count());
        std::vector<double> pb(a.pixel_count());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                pa[static_cast<std::size_t>(y) * w + x] = std::clamp(a.at(x, y, c), 0.0, 1.0);
                pb[static_cast<std::size_t>(y) * w + x] = std::clamp(b.at(x, y, c), 0.0, 1.0);
            }
        }
        std::vector<double> aa(pa.size());
        std::vector<double> bb(pa.size());
        std::vector<double> ab(pa.size());
        for (std::size_t i = 0; i < pa.size(); ++i) {
            aa[i] = pa[i] * pa[i];
            bb[i] = pb[i] * pb[i];
            ab[i] = pa[i] * pb[i];
        }
        const auto mu_a = filter_valid(pa, w, h, k);
        const auto mu_b = filter_valid(pb, w, h, k);
        const auto e_aa = filter_valid(aa, w, h, k);
        const auto e_bb = filter_valid(bb, w, h, k);
        const auto e_ab = filter_valid(ab, w, h, k);
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                if (mask != nullptr && mask->at(x + r, y + r) < 0.5) {
                    continue;
                }
                const std::size_t i = static_cast<std::size_t>(y) * ow + x;
                const double ma = mu_a[i];
                const double mb = mu_b[i];
                const double va = std::max(0.0, e_aa[i] - ma * ma);
                const double vb = std::max(0.0, e_bb[i] - mb * mb);
                const double cov = e_ab[i] - ma * mb;
                total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
        }
    }
    if (count == 0) {
        throw InvalidArgument("no SSIM windows inside the mask");
    }
    return total / static_cast<double>(count);
}

}  // namespace

MetricReport pixel_metrics(const PixelMap& a, const PixelMap& b, const MaskMap* mask, const SsimOptions& ssim) {
    if (!a.same_dims(b)) {
        throw DimensionMismatch("metric inputs differ in size or channel count");
    }
    if (mask != nullptr && !mask->same_dims(a)) {
        throw DimensionMismatch("metric mask differs in size");
    }
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (mask != nullptr && mask->at(x, y) < 0.5) {
                continue;
            }
            for (int c = 0; c < a.channels(); ++c) {
                const double d = std::clamp(a.at(x, y, c), 0.0, 1.0) - std::clamp(b.at(x, y, c), 0.0, 1.0);
                abs_sum += std::abs(d);
                sq_sum += d * d;
                ++n;
            }
        }
    }
    if (n == 0) {
        throw InvalidArgument("metric mask selects no pixels");
    }
    MetricReport r;
    r.region = mask != nullptr ? MetricRegion::masked : MetricRegion::full;
    r.mae = abs_sum / static_cast<double>(n);
    r.rmse = std::sqrt(sq_sum / static_cast<double>(n));
    r.psnr = psnr_from_rmse(r.rmse);
    r.ssim = mean_ssim(a, b, mask, ssim);
    return r;
}

// ----------------------------------------------------------------------------

double probit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("probit argument must lie in (0,1)");
    }
    return std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
}

PreferenceMatrix PreferenceMatrix::from_votes(int n_methods, const std::vector<Vote>& votes) {
    PreferenceMatrix P;
    P.n_methods = n_methods;
    P.counts.assign(n_methods, std::vector<std::uint64_t>(n_methods, 0));
    std::set<std::string> observers;
    for (const auto& v : votes) {
        if (v.left < 0 || v.right < 0 || v.left >= n_methods || v.right >= n_methods || v.left == v.right) {
            throw InvalidArgument("vote references an invalid method pair");
        }
        const int winner = v.left_won ? v.left : v.right;
        const int loser = v.left_won ? v.right : v.left;
        ++P.counts[winner][loser];
        observers.insert(v.observer);
    }
    P.observers = static_cast<int>(observers.size());
    return P;
}

std::vector<double> thurstone_scores(const PreferenceMatrix& P) {
    const int n = P.n_methods;
    if (n < 2) {
        throw InvalidArgument("scaling needs at least two methods");
    }
    std::vector<double> z(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const auto total = P.presentations(i, j);
            if (total == 0) {
                throw InvalidArgument("methods " + std::to_string(i) + " and " + std::to_string(j) +
                                      " were never compared");
            }
            const double lo = 1.0 / (2.0 * static_cast<double>(total));
            const double p = std::clamp(static_cast<double>(P.counts[i][j]) / static_cast<double>(total), lo, 1.0 - lo);
            // p = 0.5 exactly maps to 0 without rounding noise.
            z[i] += p == 0.5 ? 0.0 : probit(p);
        }
    }
    double mean = 0.0;
    for (double& v : z) {
        v /= n;
        mean += v;
    }
    mean /= n;
    for (double& v : z) {
        v -= mean;
    }
    return z;
}

namespace {

bool all_pairs_present(const PreferenceMatrix& P) {
    for (int i = 0; i < P.n_methods; ++i) {
        for (int j = i + 1; j < P.n_methods; ++j) {
            if (P.presentations(i, j) == 0) {
                return false;
            }
        }
    }
    return true;
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// Runs `bootstrap` replicates produced by `resample` and fills the interval.
template <typename Resample>
void bootstrap_interval(ThurstoneResult& out, int n_methods, int bootstrap, Resample&& resample) {
    if (bootstrap <= 0) {
        return;
    }
    std::vector<std::vector<double>> samples(n_methods);
    for (int b = 0; b < bootstrap; ++b) {
        const PreferenceMatrix P = resample();
        if (!all_pairs_present(P)) {
            continue;
        }
        const auto z = thurstone_scores(P);
        for (int i = 0; i < n_methods; ++i) {
            samples[i].push_back(z[i]);
        }
    }
    out.bootstrap_replicates = static_cast<int>(samples[0].size());
    if (out.bootstrap_replicates == 0) {
        return;
    }
    out.ci_low.emplace(n_methods);
    out.ci_high.emplace(n_methods);
    for (int i = 0; i < n_methods; ++i) {
        (*out.ci_low)[i] = percentile(samples[i], 0.025);
        (*out.ci_high)[i] = percentile(samples[i], 0.975);
    }
}

std::size_t draw_index(NormalStream& rng, std::size_t n) {
    return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)) % n;
}

}  // namespace

ThurstoneResult thurstone_case_v(int n_methods, const std::vector<Vote>& votes, int bootstrap,
                                 std::uint64_t seed) {
    ThurstoneResult out;
    out.z = thurstone_scores(PreferenceMatrix::from_votes(n_methods, votes));

    std::map<std::string, std::vector<const Vote*>> by_observer;
    for (const auto& v : votes) {
        by_observer[v.observer].push_back(&v);
    }
    std::vector<const std::vector<const Vote*>*> groups;
    for (const auto& [id, list] : by_observer) {
        groups.push_back(&list);
    }
    NormalStream rng(seed, StreamPurpose::bootstrap);
    bootstrap_interval(out, n_methods, bootstrap, [&] {
        std::vector<Vote> sample;
        sample.reserve(votes.size());
        for (std::size_t k = 0; k < groups.size(); ++k) {
            const auto& g = *groups[draw_index(rng, groups.size())];
            for (const Vote* v : g) {
                sample.push_back(*v);
            }
        }
        return PreferenceMatrix::from_votes(n_methods, sample);
    });
    return out;
}

ThurstoneResult thurstone_case_v(const PreferenceMatrix& P, int bootstrap, std::uint64_t seed) {
    ThurstoneResult out;
    out.z = thurstone_scores(P);
    // Flatten the matrix into one record per directed win.
    std::vector<std::pair<int, int>> wins;
    for (int i = 0; i < P.n_methods; ++i) {
        for (int j = 0; j < P.n_methods; ++j) {
            for (std::uint64_t c = 0; c < P.counts[i][j]; ++c) {
                wins.emplace_back(i, j);
            }
        }
    }
    NormalStream rng(seed, StreamPurpose::bootstrap);
    bootstrap_interval(out, P.n_methods, bootstrap, [&] {
        PreferenceMatrix R;
        R.n_methods = P.n_methods;
        R.counts.assign(P.n_methods, std::vector<std::uint64_t>(P.n_methods, 0));
        for (std::size_t k = 0; k < wins.size(); ++k) {
            const auto& [i, j] = wins[draw_index(rng, wins.size())];
            ++R.counts[i][j];
        }
        return R;
    });
    return out;
}

std::vector<Vote> simulate_votes(const std::vector<double>& true_scales, int observers, std::uint64_t seed) {
    NormalStream rng(seed, StreamPurpose::simulation);
    const int n = static_cast<int>(true_scales.size());
    std::vector<Vote> votes;
    for (int o = 0; o < observers; ++o) {
        const std::string id = "obs" + std::to_string(o);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                // Discriminal processes with unit variance each: the
                // difference has variance 2, so scale by 1/√2 to get Φ(s_i − s_j).
                const double di = true_scales[i] + rng.next() / std::sqrt(2.0);
                const double dj = true_scales[j] + rng.next() / std::sqrt(2.0);
                const bool swap = rng.uniform() < 0.5;
                Vote v;
                v.observer = id;
                v.left = swap ? j : i;
                v.right = swap ? i : j;
                v.left_won = swap ? dj > di : di > dj;
                votes.push_back(v);
            }
        }
    }
    return votes;
}

// ----------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

VoteTable parse_votes_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    struct Raw {
        std::string observer, left, right;
        bool left_won;
    };
    std::vector<Raw> rows;
    std::set<std::string> names;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split_csv(line);
        if (!header_seen) {
            if (f.size() != 4 || f[0] != "observer" || f[1] != "left_method" || f[2] != "right_method" ||
                f[3] != "choice") {
                throw InvalidArgument("line " + std::to_string(line_no) +
                                      ": expected header observer,left_method,right_method,choice");
            }
            header_seen = true;
            continue;
        }
        if (f.size() != 4) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                  std::to_string(f.size()));
        }
        if (f[0].empty() || f[1].empty() || f[2].empty()) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": empty observer or method");
        }
        if (f[1] == f[2]) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": a method cannot be compared with itself");
        }
        if (f[3] != "left" && f[3] != "right") {
            throw InvalidArgument("line " + std::to_string(line_no) + ": choice must be 'left' or 'right'");
        }
        rows.push_back({f[0], f[1], f[2], f[3] == "left"});
        names.insert(f[1]);
        names.insert(f[2]);
    }
    if (!header_seen) {
        throw InvalidArgument("votes file is empty");
    }
    VoteTable table;
    table.methods.assign(names.begin(), names.end());
    const auto index = [&](const std::string& name) {
        return static_cast<int>(std::lower_bound(table.methods.begin(), table.methods.end(), name) -
                                table.methods.begin());
    };
    for (const auto& r : rows) {
        table.votes.push_back({r.observer, index(r.left), index(r.right), r.left_won});
    }
    return table;
}

VoteTable read_votes_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open votes file " + path.string());
    }
    return parse_votes_csv(in);
}

}  // namespace spotlight
