#include "bdex/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace bdex {

void check_tilt_vanishes_on_boundary(const TiltField& tilt, const LatticeGeometry& geo, double T) {
    if (!tilt.H) throw std::invalid_argument("TiltField: H is empty");
    if (tilt.window < 0.0) throw std::invalid_argument("TiltField: window must be >= 0");
    std::vector<double> times{0.0};
    if (tilt.window > 0.0) {
        for (double t = 0.5 * tilt.window; t <= T + tilt.window; t += tilt.window) times.push_back(t);
        times.push_back(T);
    }
    std::vector<double> u(geo.dim());
    for (double t : times) {
        for (std::size_t tr = 0; tr < geo.transverse_count(); ++tr) {
            auto v = geo.transverse_position(tr);
            std::copy(v.begin(), v.end(), u.begin() + 1);
            for (double side : {-1.0, 1.0}) {
                u[0] = side;
                if (std::abs(tilt.H(t, u)) > 1e-12) {
                    throw std::invalid_argument("TiltField: H must vanish at u_1 = +-1");
                }
            }
        }
    }
}

void ObservableAccumulators::resize(const LatticeGeometry& geo) {
    occupancy_time.assign(geo.num_sites(), 0.0);
    bond_crossings.assign(geo.bonds().size(), 0);
    duration = 0.0;
    events = flips_in = flips_out = 0;
}

void ObservableAccumulators::merge(const ObservableAccumulators& o) {
    if (occupancy_time.empty() && bond_crossings.empty()) {
        *this = o;
        return;
    }
    if (o.occupancy_time.size() != occupancy_time.size() || o.bond_crossings.size() != bond_crossings.size()) {
        throw std::invalid_argument("ObservableAccumulators::merge: shape mismatch");
    }
    for (std::size_t i = 0; i < occupancy_time.size(); ++i) occupancy_time[i] += o.occupancy_time[i];
    for (std::size_t i = 0; i < bond_crossings.size(); ++i) bond_crossings[i] += o.bond_crossings[i];
    duration += o.duration;
    events += o.events;
    flips_in += o.flips_in;
    flips_out += o.flips_out;
}

std::vector<double> ObservableAccumulators::time_average_density() const {
    if (!(duration > 0.0)) throw std::invalid_argument("time_average_density: zero duration");
    std::vector<double> out(occupancy_time.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = occupancy_time[i] / duration;
    return out;
}

std::int64_t slice_crossings(const LatticeGeometry& geo, const ObservableAccumulators& acc, int x1) {
    const int N = geo.half_width();
    if (x1 < -N + 1 || x1 > N - 2) throw std::out_of_range("slice_crossings: no direction-0 bonds at this slice");
    std::int64_t total = 0;
    for (std::size_t tr = 0; tr < geo.transverse_count(); ++tr) {
        const long k = geo.bond_index(geo.site_at(x1, tr), 0);
        total += acc.bond_crossings[static_cast<std::size_t>(k)];
    }
    return total;
}

// ---------------------------------------------------------------------------

CtmcEngine::CtmcEngine(ExclusionModel model, Configuration initial, std::uint64_t seed, EngineKind kind,
                       std::optional<TiltField> tilt)
    : model_(std::move(model)), eta_(std::move(initial)), rng_(seed), kind_(kind), tilt_(std::move(tilt)) {
    const auto& geo = model_.geometry();
    if (eta_.size() != geo.num_sites()) throw std::invalid_argument("CtmcEngine: configuration size mismatch");
    if (tilt_ && !tilt_->H) throw std::invalid_argument("CtmcEngine: tilt without H");
    speed_ = static_cast<double>(geo.half_width()) * geo.half_width();
    n_bonds_ = geo.bonds().size();
    n_events_ = n_bonds_ + geo.boundary_sites().size();
    ledger_ = static_cast<std::int64_t>(eta_.particle_count());

    affected_.assign(geo.num_sites(), {});
    const auto& bonds = geo.bonds();
    for (std::size_t k = 0; k < n_bonds_; ++k) {
        const auto& b = bonds[k];
        for (long s : {static_cast<long>(b.x), static_cast<long>(b.y), geo.neighbor(b.x, b.dir, -1),
                       geo.neighbor(b.y, b.dir, 1)}) {
            if (s < 0) continue;
            auto& list = affected_[static_cast<std::size_t>(s)];
            if (std::find(list.begin(), list.end(), k) == list.end()) list.push_back(k);
        }
    }
    for (std::size_t f = 0; f < geo.boundary_sites().size(); ++f) {
        affected_[geo.boundary_sites()[f]].push_back(n_bonds_ + f);
    }

    bond_up_.assign(n_bonds_, 1.0);
    bond_down_.assign(n_bonds_, 1.0);
    while (tree_leaves_ < n_events_) tree_leaves_ <<= 1;
    tree_.assign(2 * tree_leaves_, 0.0);

    acc_.resize(geo);
    last_touch_.assign(geo.num_sites(), 0.0);

    refresh_window(0.0);
    if (tilt_ && tilt_->window > 0.0) next_window_ = tilt_->window;
    draw_pending();
}

double CtmcEngine::event_rate(std::size_t k) const noexcept {
    if (k < n_bonds_) {
        const auto& b = model_.geometry().bonds()[k];
        const double r = model_.bond_rate(eta_, k);
        const int ex = eta_[b.x];
        const int ey = eta_[b.y];
        if (ex == ey) return r;
        return r * (ex ? bond_up_[k] : bond_down_[k]);
    }
    const std::size_t s = model_.geometry().boundary_sites()[k - n_bonds_];
    const double b = model_.reservoir_density(s);
    return eta_[s] ? 1.0 - b : b;
}

void CtmcEngine::refresh_window(double t) {
    if (tilt_) {
        const auto& geo = model_.geometry();
        double t_eval = 0.0;
        if (tilt_->window > 0.0) t_eval = (std::floor(t / tilt_->window + 1e-12) + 0.5) * tilt_->window;
        std::vector<double> h(geo.num_sites());
        for (std::size_t s = 0; s < geo.num_sites(); ++s) h[s] = tilt_->H(t_eval, geo.position(s));
        std::vector<double> u(geo.dim());
        for (std::size_t tr = 0; tr < geo.transverse_count(); ++tr) {
            auto v = geo.transverse_position(tr);
            std::copy(v.begin(), v.end(), u.begin() + 1);
            for (double side : {-1.0, 1.0}) {
                u[0] = side;
                if (std::abs(tilt_->H(t_eval, u)) > 1e-12) {
                    throw std::invalid_argument("TiltField: H must vanish at u_1 = +-1");
                }
            }
        }
        tilt_bound_ = 1.0;
        for (std::size_t k = 0; k < n_bonds_; ++k) {
            const auto& b = geo.bonds()[k];
            bond_up_[k] = std::exp(h[b.y] - h[b.x]);
            bond_down_[k] = std::exp(h[b.x] - h[b.y]);
            tilt_bound_ = std::max({tilt_bound_, bond_up_[k], bond_down_[k]});
        }
    }
    bond_bound_ = model_.max_bulk_rate() * tilt_bound_;
    proposal_total_ = static_cast<double>(n_bonds_) * bond_bound_ +
                      static_cast<double>(n_events_ - n_bonds_);
    if (kind_ == EngineKind::Gillespie) rebuild_tree();
}

void CtmcEngine::rebuild_tree() {
    std::fill(tree_.begin(), tree_.end(), 0.0);
    for (std::size_t k = 0; k < n_events_; ++k) tree_[tree_leaves_ + k] = event_rate(k);
    for (std::size_t i = tree_leaves_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

void CtmcEngine::update_leaf(std::size_t k) {
    std::size_t i = tree_leaves_ + k;
    tree_[i] = event_rate(k);
    for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

void CtmcEngine::draw_pending() {
    const double total = kind_ == EngineKind::Gillespie ? tree_[1] : proposal_total_;
    pending_ = t_ + rng_.exponential(speed_ * total);
}

void CtmcEngine::touch_site(std::size_t s) {
    acc_.occupancy_time[s] += (t_ - last_touch_[s]) * eta_[s];
    last_touch_[s] = t_;
}

void CtmcEngine::execute(std::size_t k) {
    const auto& geo = model_.geometry();
    if (k < n_bonds_) {
        const auto& b = geo.bonds()[k];
        const int ex = eta_[b.x];
        const int ey = eta_[b.y];
        if (ex == ey) return;
        touch_site(b.x);
        touch_site(b.y);
        eta_.swap_sites(b.x, b.y);
        acc_.bond_crossings[k] += ex ? 1 : -1;
        ++acc_.events;
        if (kind_ == EngineKind::Gillespie) {
            for (auto e : affected_[b.x]) update_leaf(e);
            for (auto e : affected_[b.y]) update_leaf(e);
        }
        return;
    }
    const std::size_t s = geo.boundary_sites()[k - n_bonds_];
    touch_site(s);
    if (eta_[s]) {
        ++acc_.flips_out;
        --ledger_;
    } else {
        ++acc_.flips_in;
        ++ledger_;
    }
    eta_.flip(s);
    ++acc_.events;
    if (kind_ == EngineKind::Gillespie) {
        for (auto e : affected_[s]) update_leaf(e);
    }
}

bool CtmcEngine::step_gillespie() {
    ++proposals_;
    const double total = tree_[1];
    double target = rng_.uniform() * total;
    std::size_t i = 1;
    while (i < tree_leaves_) {
        if (target < tree_[2 * i] || tree_[2 * i + 1] <= 0.0) {
            i = 2 * i;
        } else {
            target -= tree_[2 * i];
            i = 2 * i + 1;
        }
    }
    std::size_t k = i - tree_leaves_;
    if (k >= n_events_) k = n_events_ - 1;
    execute(k);
    return true;
}

bool CtmcEngine::step_thinning() {
    ++proposals_;
    const double bond_mass = static_cast<double>(n_bonds_) * bond_bound_;
    const double u = rng_.uniform() * proposal_total_;
    std::size_t k;
    double bound;
    if (u < bond_mass) {
        k = std::min(static_cast<std::size_t>(u / bond_bound_), n_bonds_ - 1);
        const auto& b = model_.geometry().bonds()[k];
        // Exchanging equal occupancies leaves the state unchanged.
        if (eta_[b.x] == eta_[b.y]) return false;
        bound = bond_bound_;
    } else {
        k = n_bonds_ + std::min(static_cast<std::size_t>(u - bond_mass), n_events_ - n_bonds_ - 1);
        bound = 1.0;
    }
    if (rng_.uniform() * bound >= event_rate(k)) return false;
    execute(k);
    return true;
}

void CtmcEngine::advance_to(double t_end) {
    if (!(t_end > t_)) return;
    const bool windowed = tilt_ && tilt_->window > 0.0;
    while (true) {
        const bool edge = windowed && next_window_ <= t_end;
        const double horizon = edge ? next_window_ : t_end;
        if (pending_ <= horizon) {
            t_ = pending_;
            if (kind_ == EngineKind::Gillespie) {
                step_gillespie();
            } else {
                step_thinning();
            }
            draw_pending();
            continue;
        }
        t_ = horizon;
        if (!edge) break;
        const double before = kind_ == EngineKind::Gillespie ? tree_[1] : proposal_total_;
        refresh_window(t_);
        next_window_ += tilt_->window;
        const double after = kind_ == EngineKind::Gillespie ? tree_[1] : proposal_total_;
        if (before != after) draw_pending();
    }
}

void CtmcEngine::flush_occupancy() {
    for (std::size_t s = 0; s < eta_.size(); ++s) touch_site(s);
    acc_.duration = t_ - acc_start_;
}

const ObservableAccumulators& CtmcEngine::accumulators() {
    flush_occupancy();
    return acc_;
}

void CtmcEngine::reset_accumulators() {
    acc_.resize(model_.geometry());
    std::fill(last_touch_.begin(), last_touch_.end(), t_);
    acc_start_ = t_;
}

double CtmcEngine::cached_total_rate() const {
    if (kind_ != EngineKind::Gillespie) throw std::logic_error("cached_total_rate: thinning engine keeps no rate table");
    return speed_ * tree_[1];
}

double CtmcEngine::recomputed_total_rate() const {
    double total = 0.0;
    if (!tilt_) {
        for (const auto& tr : model_.enumerate_transitions(eta_)) total += tr.rate;
    } else {
        for (std::size_t k = 0; k < n_events_; ++k) total += event_rate(k);
    }
    return speed_ * total;
}

// ---------------------------------------------------------------------------

RunResult run_ctmc(const ExclusionModel& model, const Configuration& initial, const RunOptions& options) {
    if (options.T < 0.0) throw std::invalid_argument("run_ctmc: T must be >= 0");
    if (options.burn_in < 0.0 || options.burn_in > options.T) {
        throw std::invalid_argument("run_ctmc: burn-in must lie in [0, T]");
    }
    CtmcEngine engine(model, initial, options.seed, options.engine, options.tilt);
    if (options.tilt) check_tilt_vanishes_on_boundary(*options.tilt, model.geometry(), options.T);

    auto probes = options.probe_times;
    std::sort(probes.begin(), probes.end());
    RunResult result;
    bool accumulating = options.burn_in <= 0.0;
    for (double p : probes) {
        if (p < 0.0 || p > options.T) throw std::invalid_argument("run_ctmc: probe time outside [0, T]");
        if (!accumulating && p >= options.burn_in) {
            engine.advance_to(options.burn_in);
            engine.reset_accumulators();
            accumulating = true;
        }
        engine.advance_to(p);
        result.snapshots.emplace_back(p, engine.state());
    }
    if (!accumulating) {
        engine.advance_to(options.burn_in);
        engine.reset_accumulators();
    }
    engine.advance_to(options.T);
    result.accumulators = engine.accumulators();
    result.final_state = engine.state();
    return result;
}

unsigned worker_threads() {
    if (const char* env = std::getenv("BDEX_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bdex
