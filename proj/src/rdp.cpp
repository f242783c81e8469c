#include "umdp/rdp.hpp"

#include "umdp/errors.hpp"
#include "umdp/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace umdp {

ValueField initial_value_field(Index num_states, const std::vector<char>& state_safe, const Dfa& dfa) {
    ValueField f;
    f.v = Eigen::MatrixXd::Zero(num_states, dfa.num_states);
    if (dfa.accepting >= 0)
        for (Index s = 0; s < num_states; ++s)
            if (state_safe[static_cast<std::size_t>(s)]) f.v(s, dfa.accepting) = 1.0;
    f.step = 0;
    return f;
}

ProductView make_product_view(const Smdp& smdp) {
    ProductView view;
    const Partition& p = *smdp.partition;
    view.num_states = smdp.state_count();
    view.reduced = smdp.reduced;
    view.state_labels.resize(static_cast<std::size_t>(view.num_states), 0);
    view.state_safe.resize(static_cast<std::size_t>(view.num_states), 0);
    view.cell_of_state.resize(static_cast<std::size_t>(view.num_states), -1);
    if (smdp.reduced) {
        for (std::size_t i = 0; i < smdp.safe_cells.size(); ++i) {
            view.state_labels[i] = p.label_of_cell(smdp.safe_cells[i]);
            view.state_safe[i] = 1;
            view.cell_of_state[i] = smdp.safe_cells[i];
        }
        // trailing state is s_unsafe: empty label, unsafe, no cell
    } else {
        for (Index c = 0; c < p.cell_count(); ++c) {
            view.state_labels[static_cast<std::size_t>(c)] = p.label_of_cell(c);
            view.state_safe[static_cast<std::size_t>(c)] = p.cell_safe(c) ? 1 : 0;
            view.cell_of_state[static_cast<std::size_t>(c)] = c;
        }
    }
    return view;
}

ProductView make_product_view(const Imdp& imdp) {
    ProductView view;
    const Partition& p = *imdp.partition;
    view.num_states = p.cell_count();
    view.state_labels.resize(static_cast<std::size_t>(view.num_states), 0);
    view.state_safe.resize(static_cast<std::size_t>(view.num_states), 0);
    view.cell_of_state.resize(static_cast<std::size_t>(view.num_states), -1);
    for (Index c = 0; c < p.cell_count(); ++c) {
        view.state_labels[static_cast<std::size_t>(c)] = p.label_of_cell(c);
        view.state_safe[static_cast<std::size_t>(c)] = p.cell_safe(c) ? 1 : 0;
        view.cell_of_state[static_cast<std::size_t>(c)] = c;
    }
    return view;
}

namespace {

/// vz(state) = v(state, delta(z, L(state))) for every state, one column
/// per DFA state.  Unsafe states stay 0 by the ValueField convention.
Eigen::MatrixXd successor_values(const ValueField& in, const ProductView& view, const Dfa& dfa) {
    Eigen::MatrixXd vz = Eigen::MatrixXd::Zero(view.num_states, dfa.num_states);
    for (int z = 0; z < dfa.num_states; ++z) {
        if (dfa.is_accepting(z)) continue; // accepting rows are never backed up
        for (Index s = 0; s < view.num_states; ++s) {
            if (!view.state_safe[static_cast<std::size_t>(s)]) continue; // stays 0
            const int z_next = dfa.step(z, view.state_labels[static_cast<std::size_t>(s)]);
            vz(s, z) = in.v(s, z_next);
        }
    }
    return vz;
}

// min or max of vz over the cells of a cluster (full variant: every cell
// in the index box; reduced variant: safe cells plus 0 if s_unsafe is a
// member).
double cluster_extreme(const Smdp& smdp, const Cluster& cl, const Eigen::VectorXd& vz_col,
                       bool pessimistic) {
    const Partition& p = *smdp.partition;
    double best = pessimistic ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(p.dim());
    IndexVec coords(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) coords[d] = cl.lo[d];
    while (true) {
        const Index cell = p.cell_from_coords(coords);
        double value;
        if (smdp.reduced) {
            const Index si = smdp.safe_index_of_cell[static_cast<std::size_t>(cell)];
            if (si < 0) {
                value = std::numeric_limits<double>::quiet_NaN(); // skipped below
            } else {
                value = vz_col[si];
            }
        } else {
            value = vz_col[cell];
        }
        if (value == value) best = pessimistic ? std::min(best, value) : std::max(best, value);
        int d = n - 1;
        for (; d >= 0; --d) {
            if (coords[d] < cl.hi[d]) {
                ++coords[d];
                for (int e = d + 1; e < n; ++e) coords[e] = cl.lo[e];
                break;
            }
        }
        if (d < 0) break;
    }
    if (smdp.reduced && cl.touches_unsafe) best = pessimistic ? std::min(best, 0.0) : std::max(best, 0.0);
    return best;
}

void pin_columns(ValueField& out, const ProductView& view, const Dfa& dfa) {
    if (dfa.accepting >= 0)
        for (Index s = 0; s < view.num_states; ++s)
            out.v(s, dfa.accepting) = view.state_safe[static_cast<std::size_t>(s)] ? 1.0 : 0.0;
}

} // namespace

void backup_smdp(const ValueField& in, const Smdp& smdp, const ProductView& view, const Dfa& dfa,
                 BackupMode mode, ValueField& out, std::vector<std::uint16_t>* argmax, int threads) {
    const bool pessimistic = mode == BackupMode::Pessimistic;
    const Eigen::MatrixXd vz = successor_values(in, view, dfa);
    out.v = Eigen::MatrixXd::Zero(view.num_states, dfa.num_states);
    pin_columns(out, view, dfa);
    if (argmax) argmax->assign(static_cast<std::size_t>(view.num_states) * dfa.num_states, 0);

    parallel_for(smdp.safe_cells.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t si = begin; si < end; ++si) {
            const Index state = smdp.reduced ? static_cast<Index>(si) : smdp.safe_cells[si];
            for (int z = 0; z < dfa.num_states; ++z) {
                if (dfa.is_accepting(z)) continue;
                double best = -1.0;
                int best_action = 0;
                for (int a = 0; a < smdp.num_actions; ++a) {
                    double acc = 0.0;
                    for (const Cluster& cl : smdp.row(static_cast<Index>(si), a))
                        acc += cl.mass * cluster_extreme(smdp, cl, vz.col(z), pessimistic);
                    if (acc > best) {
                        best = acc;
                        best_action = a;
                    }
                }
                out.v(state, z) = best;
                if (argmax)
                    (*argmax)[static_cast<std::size_t>(state) * dfa.num_states + z] =
                        static_cast<std::uint16_t>(best_action);
            }
        }
    });
    out.step = in.step + 1;
}

void backup_imdp(const ValueField& in, const Imdp& imdp, const ProductView& view, const Dfa& dfa,
                 BackupMode mode, ValueField& out, std::vector<std::uint16_t>* argmax, int threads) {
    const bool pessimistic = mode == BackupMode::Pessimistic;
    const Eigen::MatrixXd vz = successor_values(in, view, dfa);
    out.v = Eigen::MatrixXd::Zero(view.num_states, dfa.num_states);
    pin_columns(out, view, dfa);
    if (argmax) argmax->assign(static_cast<std::size_t>(view.num_states) * dfa.num_states, 0);

    parallel_for(imdp.safe_cells.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> order;
        std::vector<double> gamma;
        for (std::size_t si = begin; si < end; ++si) {
            const Index state = imdp.safe_cells[si];
            for (int z = 0; z < dfa.num_states; ++z) {
                if (dfa.is_accepting(z)) continue;
                double best = -1.0;
                int best_action = 0;
                for (int a = 0; a < imdp.num_actions; ++a) {
                    const auto& row = imdp.row(static_cast<Index>(si), a);
                    order.resize(row.size());
                    std::iota(order.begin(), order.end(), std::size_t{0});
                    // adversary spends the slack on the worst (best) values first
                    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                        const double vx = vz(row[x].succ, z), vy = vz(row[y].succ, z);
                        if (vx != vy) return pessimistic ? vx < vy : vx > vy;
                        return row[x].succ < row[y].succ;
                    });
                    gamma.resize(row.size());
                    double slack = 1.0;
                    for (std::size_t e = 0; e < row.size(); ++e) {
                        gamma[e] = row[e].p_lo;
                        slack -= row[e].p_lo;
                    }
                    if (slack < -1e-9)
                        throw Error(ErrorCode::InfeasibleIntervals, "lower bounds exceed 1");
                    for (std::size_t e : order) {
                        const double take = std::min(slack, row[e].p_hi - row[e].p_lo);
                        gamma[e] += take;
                        slack -= take;
                        if (slack <= 0.0) break;
                    }
                    if (slack > 1e-9)
                        throw Error(ErrorCode::InfeasibleIntervals, "upper bounds sum below 1");
                    double acc = 0.0; // fixed successor order keeps the sum deterministic
                    for (std::size_t e = 0; e < row.size(); ++e) acc += gamma[e] * vz(row[e].succ, z);
                    if (acc > best) {
                        best = acc;
                        best_action = a;
                    }
                }
                out.v(state, z) = best;
                if (argmax)
                    (*argmax)[static_cast<std::size_t>(state) * dfa.num_states + z] =
                        static_cast<std::uint16_t>(best_action);
            }
        }
    });
    out.step = in.step + 1;
}

namespace {

template <typename Abstraction, typename BackupFn>
RdpOutput rdp_run_impl(const Abstraction& abs, const Dfa& dfa, Index horizon, int /*threads*/,
                       BackupFn&& backup) {
    if (horizon < 1) throw Error(ErrorCode::ConfigInvalid, "horizon must be >= 1");
    const ProductView view = make_product_view(abs);
    const Partition& p = *abs.partition;

    auto make_strategy = [&]() {
        Strategy s;
        s.horizon = horizon;
        s.num_cells = p.cell_count();
        s.num_dfa_states = dfa.num_states;
        s.actions.assign(static_cast<std::size_t>(horizon) * p.cell_count() * dfa.num_states, 0);
        return s;
    };
    auto store_step = [&](Strategy& s, Index t, const std::vector<std::uint16_t>& argmax) {
        for (Index cell = 0; cell < p.cell_count(); ++cell) {
            Index state = cell;
            if (view.reduced) {
                state = abs.safe_index_of_cell[static_cast<std::size_t>(cell)];
                if (state < 0) continue; // unsafe cells keep the default action
            }
            for (int z = 0; z < dfa.num_states; ++z)
                s.actions[(static_cast<std::size_t>(t) * p.cell_count() + cell) * dfa.num_states + z] =
                    argmax[static_cast<std::size_t>(state) * dfa.num_states + z];
        }
    };

    RdpOutput out;
    out.strategy = make_strategy();
    out.optimistic_strategy = make_strategy();
    std::vector<std::uint16_t> argmax;

    ValueField lo = initial_value_field(view.num_states, view.state_safe, dfa);
    ValueField lo_next;
    for (Index k = 0; k < horizon; ++k) {
        backup(lo, BackupMode::Pessimistic, lo_next, &argmax);
        store_step(out.strategy, horizon - k - 1, argmax); // sigma_t uses iterate v_{T-t-1}
        std::swap(lo, lo_next);
    }
    ValueField hi = initial_value_field(view.num_states, view.state_safe, dfa);
    ValueField hi_next;
    for (Index k = 0; k < horizon; ++k) {
        backup(hi, BackupMode::Optimistic, hi_next, &argmax);
        store_step(out.optimistic_strategy, horizon - k - 1, argmax);
        std::swap(hi, hi_next);
    }

    out.final_lo = lo;
    out.final_hi = hi;
    out.bounds.p_lo = Vec::Zero(p.cell_count());
    out.bounds.p_hi = Vec::Zero(p.cell_count());
    out.bounds.gap = 0.0;
    for (Index cell = 0; cell < p.cell_count(); ++cell) {
        if (!p.cell_safe(cell)) continue;
        Index state = cell;
        if (view.reduced) state = abs.safe_index_of_cell[static_cast<std::size_t>(cell)];
        const int z0 = dfa.step(dfa.init, p.label_of_cell(cell));
        double vlo, vhi;
        if (dfa.is_accepting(z0)) {
            vlo = vhi = 1.0;
        } else {
            vlo = lo.v(state, z0);
            vhi = hi.v(state, z0);
        }
        out.bounds.p_lo[cell] = vlo;
        out.bounds.p_hi[cell] = vhi;
        out.bounds.gap = std::max(out.bounds.gap, vhi - vlo);
    }
    return out;
}

} // namespace

RdpOutput rdp_run(const Smdp& smdp, const Dfa& dfa, Index horizon, int threads) {
    const ProductView view = make_product_view(smdp);
    return rdp_run_impl(smdp, dfa, horizon, threads,
                        [&](const ValueField& in, BackupMode mode, ValueField& out,
                            std::vector<std::uint16_t>* argmax) {
                            backup_smdp(in, smdp, view, dfa, mode, out, argmax, threads);
                        });
}

RdpOutput rdp_run(const Imdp& imdp, const Dfa& dfa, Index horizon, int threads) {
    const ProductView view = make_product_view(imdp);
    return rdp_run_impl(imdp, dfa, horizon, threads,
                        [&](const ValueField& in, BackupMode mode, ValueField& out,
                            std::vector<std::uint16_t>* argmax) {
                            backup_imdp(in, imdp, view, dfa, mode, out, argmax, threads);
                        });
}

void Controller::reset() {
    z_ = dfa_->init;
    left_domain_ = false;
}

int Controller::next_action(Index t, const Vec& x) {
    z_ = dfa_->step(z_, regions_->label_of(x));
    Index cell = -1;
    try {
        cell = locate(*partition_, x);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfDomain) throw;
        left_domain_ = true;
        return default_action_;
    }
    if (t < 0 || t >= strategy_->horizon) return default_action_;
    return strategy_->at(t, cell, z_);
}

Controller refine_controller(const Strategy& strategy, const Partition& partition, const Dfa& dfa,
                             const RegionSet& regions, int default_action) {
    return Controller(&strategy, &partition, &dfa, &regions, default_action);
}

} // namespace umdp
