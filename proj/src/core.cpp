#include "bvt/core.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

namespace bvt {

int worker_count() {
    if (const char* env = std::getenv("BVT_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(chunk, 1);
    std::size_t nchunks = (n + chunk - 1) / chunk;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), nchunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) body(c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            // static round-robin: chunk c belongs to worker c % workers
            for (std::size_t c = w; c < nchunks; c += workers)
                body(c * chunk, std::min(n, (c + 1) * chunk));
        });
    }
    for (auto& t : pool) t.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term, std::size_t chunk) {
    if (n == 0) return 0.0;
    std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(nchunks, 0.0);
    parallel_chunks(n, chunk, [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += term(i);
        partial[b / chunk] = s;
    });
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    // Newton iteration on P_n starting from the Chebyshev-like guess
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            double pn = (n == 1) ? x : p1;
            double pm = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pm) / (x * x - 1.0);
            double dx = pn / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        g.x[i] = x;
        g.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(g)).first->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    if (b <= a) return 0.0;
    const GaussRule& g = gauss_legendre(n);
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < n; ++i) s += g.w[i] * f(c + h * g.x[i]);
    return s * h;
}

}  // namespace bvt

namespace bvt::bump {

double value(double s) {
    double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return std::exp(1.0 - 1.0 / q);
}

double deriv(double s) {
    double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return value(s) * (-2.0 * s / (q * q));
}

double second(double s) {
    double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    double g = -2.0 * s / (q * q);                                // (log b)'
    double gp = (-2.0 * q * q - 8.0 * s * s * q) / (q * q * q * q); // (log b)''
    return value(s) * (g * g + gp);
}

namespace {
struct Table {
    static constexpr int N = 8192;
    std::vector<double> cum;  // ∫_{-1}^{x_i}
    double dx = 2.0 / N;
    Table() : cum(N + 1, 0.0) {
        for (int i = 0; i < N; ++i) {
            double a = -1.0 + i * dx;
            cum[i + 1] = cum[i] + gauss_integrate(value, a, a + dx, 10);
        }
    }
};
const Table& table() {
    static const Table t;
    return t;
}
}  // namespace

double integral(double s) {
    const Table& t = table();
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return t.cum[Table::N];
    double u = (s + 1.0) / t.dx;
    int i = std::min(static_cast<int>(u), Table::N - 1);
    double x = u - i, h = t.dx;
    double x0 = -1.0 + i * h;
    double f0 = t.cum[i], f1 = t.cum[i + 1];
    double d0 = value(x0) * h, d1 = value(x0 + h) * h;
    double h00 = 2 * x * x * x - 3 * x * x + 1, h10 = x * x * x - 2 * x * x + x;
    double h01 = -2 * x * x * x + 3 * x * x, h11 = x * x * x - x * x;
    return h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1;
}

double mass() { return table().cum[Table::N]; }

}  // namespace bvt::bump
