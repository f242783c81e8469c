#include "umdp/rdp_oracle.hpp"

#include "umdp/errors.hpp"
#include "umdp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace umdp {

namespace {

double mapped_value(const ValueField& in, const ProductView& view, const Dfa& dfa, Index state, int z) {
    if (!view.state_safe[static_cast<std::size_t>(state)]) return 0.0;
    const int z_next = dfa.step(z, view.state_labels[static_cast<std::size_t>(state)]);
    return in.v(state, z_next);
}

std::vector<Index> cluster_members(const Smdp& smdp, const Cluster& cl) {
    const Partition& p = *smdp.partition;
    std::vector<Index> members;
    const int n = static_cast<int>(p.dim());
    IndexVec coords(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) coords[d] = cl.lo[d];
    while (true) {
        const Index cell = p.cell_from_coords(coords);
        if (smdp.reduced) {
            const Index si = smdp.safe_index_of_cell[static_cast<std::size_t>(cell)];
            if (si >= 0) members.push_back(si);
        } else {
            members.push_back(cell);
        }
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
    if (smdp.reduced && cl.touches_unsafe)
        members.push_back(static_cast<Index>(smdp.safe_cells.size())); // s_unsafe
    return members;
}

} // namespace

void backup_smdp_oracle(const ValueField& in, const Smdp& smdp, const ProductView& view, const Dfa& dfa,
                        BackupMode mode, ValueField& out) {
    if (view.num_states > 9 || smdp.num_actions > 2)
        throw Error(ErrorCode::InstanceTooLarge, "oracle limited to 8 cells and 2 actions");
    out.v = Eigen::MatrixXd::Zero(view.num_states, dfa.num_states);
    if (dfa.accepting >= 0)
        for (Index s = 0; s < view.num_states; ++s)
            if (view.state_safe[static_cast<std::size_t>(s)]) out.v(s, dfa.accepting) = 1.0;

    for (std::size_t si = 0; si < smdp.safe_cells.size(); ++si) {
        const Index state = smdp.reduced ? static_cast<Index>(si) : smdp.safe_cells[si];
        for (int z = 0; z < dfa.num_states; ++z) {
            if (dfa.is_accepting(z)) continue;
            double best_over_actions = -1.0;
            for (int a = 0; a < smdp.num_actions; ++a) {
                const auto& row = smdp.row(static_cast<Index>(si), a);
                std::vector<std::vector<Index>> members;
                std::size_t combos = 1;
                for (const Cluster& cl : row) {
                    members.push_back(cluster_members(smdp, cl));
                    if (members.back().size() > 4)
                        throw Error(ErrorCode::InstanceTooLarge, "oracle supports clusters up to 4 states");
                    combos *= members.back().size();
                    if (combos > 1u << 20)
                        throw Error(ErrorCode::InstanceTooLarge, "oracle combination blow-up");
                }
                // every vertex distribution: one Dirac per cluster
                double ext = mode == BackupMode::Pessimistic ? 2.0 : -1.0;
                std::vector<std::size_t> pick(row.size(), 0);
                while (true) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < row.size(); ++c)
                        acc += row[c].mass * mapped_value(in, view, dfa, members[c][pick[c]], z);
                    ext = mode == BackupMode::Pessimistic ? std::min(ext, acc) : std::max(ext, acc);
                    std::size_t c = 0;
                    for (; c < row.size(); ++c) {
                        if (++pick[c] < members[c].size()) break;
                        pick[c] = 0;
                    }
                    if (c == row.size()) break;
                }
                if (row.empty()) ext = 0.0;
                best_over_actions = std::max(best_over_actions, ext);
            }
            out.v(state, z) = best_over_actions;
        }
    }
    out.step = in.step + 1;
}

void backup_imdp_oracle(const ValueField& in, const Imdp& imdp, const ProductView& view, const Dfa& dfa,
                        BackupMode mode, ValueField& out) {
    if (view.num_states > 9 || imdp.num_actions > 2)
        throw Error(ErrorCode::InstanceTooLarge, "oracle limited to 8 cells and 2 actions");
    out.v = Eigen::MatrixXd::Zero(view.num_states, dfa.num_states);
    if (dfa.accepting >= 0)
        for (Index s = 0; s < view.num_states; ++s)
            if (view.state_safe[static_cast<std::size_t>(s)]) out.v(s, dfa.accepting) = 1.0;

    for (std::size_t si = 0; si < imdp.safe_cells.size(); ++si) {
        const Index state = imdp.safe_cells[si];
        for (int z = 0; z < dfa.num_states; ++z) {
            if (dfa.is_accepting(z)) continue;
            double best_over_actions = -1.0;
            for (int a = 0; a < imdp.num_actions; ++a) {
                const auto& row = imdp.row(static_cast<Index>(si), a);
                if (row.size() > 4)
                    throw Error(ErrorCode::InstanceTooLarge, "oracle rows limited to 4 successors");
                std::vector<std::size_t> order(row.size());
                std::iota(order.begin(), order.end(), std::size_t{0});
                double ext = mode == BackupMode::Pessimistic ? 2.0 : -1.0;
                // all order-induced extreme points of the interval polytope
                do {
                    double slack = 1.0;
                    std::vector<double> gamma(row.size());
                    for (std::size_t e = 0; e < row.size(); ++e) {
                        gamma[e] = row[e].p_lo;
                        slack -= row[e].p_lo;
                    }
                    for (std::size_t e : order) {
                        const double take = std::min(slack, row[e].p_hi - row[e].p_lo);
                        gamma[e] += take;
                        slack -= take;
                    }
                    if (slack > 1e-9) throw Error(ErrorCode::InfeasibleIntervals, "row infeasible");
                    double acc = 0.0;
                    for (std::size_t e = 0; e < row.size(); ++e)
                        acc += gamma[e] * mapped_value(in, view, dfa, row[e].succ, z);
                    ext = mode == BackupMode::Pessimistic ? std::min(ext, acc) : std::max(ext, acc);
                } while (std::next_permutation(order.begin(), order.end()));
                if (row.empty()) ext = 0.0;
                best_over_actions = std::max(best_over_actions, ext);
            }
            out.v(state, z) = best_over_actions;
        }
    }
    out.step = in.step + 1;
}

namespace {

struct TinyWorld {
    RegionSet regions;
    Partition partition;
    FormulaArena arena;
    Dfa dfa;

    TinyWorld(Index n_cells, Index goal_lo, Index goal_hi, Index safe_hi)
        : arena({"safe", "goal"}) {
        const double w = 1.0 / static_cast<double>(n_cells);
        LabeledRegion goal;
        goal.name = "goal";
        goal.atom_mask = 0b11;
        goal.boxes.push_back(make_box({static_cast<double>(goal_lo) * w}, {static_cast<double>(goal_hi) * w}));
        regions = make_region_set({"goal"}, {goal}, {make_box({0.0}, {static_cast<double>(safe_hi) * w})});
        partition = build_partition(regions, make_box({0.0}, {1.0}), {n_cells});
        dfa = build_dfa(arena, arena.conj(arena.eventually(arena.atom("goal")),
                                          arena.globally(arena.atom("safe"))));
    }
};

ValueField random_value_field(const ProductView& view, const Dfa& dfa, CounterRng& rng) {
    ValueField f = initial_value_field(view.num_states, view.state_safe, dfa);
    for (Index s = 0; s < view.num_states; ++s) {
        if (!view.state_safe[static_cast<std::size_t>(s)]) continue;
        for (int z = 0; z < dfa.num_states; ++z)
            if (!dfa.is_accepting(z)) f.v(s, z) = rng.next_double();
    }
    return f;
}

double field_deviation(const ValueField& a, const ValueField& b) {
    return (a.v - b.v).cwiseAbs().maxCoeff();
}

} // namespace

double oracle_check_smdp(int instances, std::uint64_t seed) {
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const Index n = 4 + static_cast<Index>(rng.next_u64() % 5); // 4..8 cells
        const Index goal_lo = static_cast<Index>(rng.next_u64() % (n - 2));
        const Index goal_hi = goal_lo + 1;
        const Index safe_hi = goal_hi + 1 + static_cast<Index>(rng.next_u64() % (n - goal_hi));
        TinyWorld world(n, goal_lo, goal_hi, std::min(safe_hi, n));
        const bool reduced = (rng.next_u64() & 1) != 0;
        const int actions = 1 + static_cast<int>(rng.next_u64() % 2);

        Smdp m;
        m.partition = &world.partition;
        m.num_actions = actions;
        m.reduced = reduced;
        for (Index c = 0; c < n; ++c) {
            m.safe_index_of_cell.push_back(world.partition.cell_safe(c)
                                               ? static_cast<Index>(m.safe_cells.size())
                                               : -1);
            if (world.partition.cell_safe(c)) m.safe_cells.push_back(c);
        }
        for (std::size_t si = 0; si < m.safe_cells.size(); ++si) {
            for (int a = 0; a < actions; ++a) {
                std::vector<Cluster> row;
                const int k = 1 + static_cast<int>(rng.next_u64() % 4);
                double total = 0.0;
                for (int c = 0; c < k; ++c) {
                    Cluster cl;
                    const Index lo = static_cast<Index>(rng.next_u64() % n);
                    const Index hi = std::min<Index>(n - 1, lo + static_cast<Index>(rng.next_u64() % 4));
                    cl.lo[0] = static_cast<std::int32_t>(lo);
                    cl.hi[0] = static_cast<std::int32_t>(hi);
                    cl.mass = 0.05 + rng.next_double();
                    for (Index q = lo; q <= hi; ++q)
                        if (!world.partition.cell_safe(q)) cl.touches_unsafe = true;
                    total += cl.mass;
                    row.push_back(cl);
                }
                for (auto& cl : row) cl.mass /= total;
                m.rows.push_back(std::move(row));
            }
        }

        const ProductView view = make_product_view(m);
        const ValueField in = random_value_field(view, world.dfa, rng);
        for (BackupMode mode : {BackupMode::Pessimistic, BackupMode::Optimistic}) {
            ValueField fast, slow;
            backup_smdp(in, m, view, world.dfa, mode, fast, nullptr, 1);
            backup_smdp_oracle(in, m, view, world.dfa, mode, slow);
            worst = std::max(worst, field_deviation(fast, slow));
        }
    }
    return worst;
}

double oracle_check_imdp(int instances, std::uint64_t seed) {
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i) + (1ull << 32));
        const Index n = 4 + static_cast<Index>(rng.next_u64() % 5);
        const Index goal_lo = static_cast<Index>(rng.next_u64() % (n - 2));
        const Index goal_hi = goal_lo + 1;
        const Index safe_hi = goal_hi + 1 + static_cast<Index>(rng.next_u64() % (n - goal_hi));
        TinyWorld world(n, goal_lo, goal_hi, std::min(safe_hi, n));
        const int actions = 1 + static_cast<int>(rng.next_u64() % 2);

        Imdp m;
        m.partition = &world.partition;
        m.num_actions = actions;
        for (Index c = 0; c < n; ++c) {
            m.safe_index_of_cell.push_back(world.partition.cell_safe(c)
                                               ? static_cast<Index>(m.safe_cells.size())
                                               : -1);
            if (world.partition.cell_safe(c)) m.safe_cells.push_back(c);
        }
        for (std::size_t si = 0; si < m.safe_cells.size(); ++si) {
            for (int a = 0; a < actions; ++a) {
                const int k = 2 + static_cast<int>(rng.next_u64() % 3); // 2..4 successors
                std::vector<Index> succs;
                while (static_cast<int>(succs.size()) < k) {
                    const Index s = static_cast<Index>(rng.next_u64() % n);
                    if (std::find(succs.begin(), succs.end(), s) == succs.end()) succs.push_back(s);
                }
                std::sort(succs.begin(), succs.end());
                std::vector<ImdpEntry> row;
                double sum_lo = 0.0, sum_hi = 0.0;
                for (Index s : succs) {
                    ImdpEntry e;
                    e.succ = s;
                    e.p_lo = 0.3 * rng.next_double();
                    e.p_hi = e.p_lo + 0.6 * rng.next_double();
                    sum_lo += e.p_lo;
                    sum_hi += e.p_hi;
                    row.push_back(e);
                }
                if (sum_lo > 1.0) {
                    for (auto& e : row) e.p_lo *= 0.9 / sum_lo;
                    sum_hi = 0.0;
                    for (auto& e : row) {
                        e.p_hi = std::max(e.p_hi, e.p_lo);
                        sum_hi += e.p_hi;
                    }
                }
                if (sum_hi < 1.0) row.back().p_hi += 1.0 - sum_hi + 0.1;
                for (auto& e : row) e.p_hi = std::min(e.p_hi, 1.0);
                sum_hi = 0.0;
                for (auto& e : row) sum_hi += e.p_hi;
                if (sum_hi < 1.0) row.back().p_hi = std::min(1.0, row.back().p_hi + 1.0 - sum_hi);
                m.rows.push_back(std::move(row));
            }
        }

        const ProductView view = make_product_view(m);
        const ValueField in = random_value_field(view, world.dfa, rng);
        bool feasible = true;
        for (const auto& row : m.rows) {
            double lo = 0.0, hi = 0.0;
            for (const auto& e : row) {
                lo += e.p_lo;
                hi += e.p_hi;
            }
            if (lo > 1.0 || hi < 1.0) feasible = false;
        }
        if (!feasible) continue;
        for (BackupMode mode : {BackupMode::Pessimistic, BackupMode::Optimistic}) {
            ValueField fast, slow;
            backup_imdp(in, m, view, world.dfa, mode, fast, nullptr, 1);
            backup_imdp_oracle(in, m, view, world.dfa, mode, slow);
            worst = std::max(worst, field_deviation(fast, slow));
        }
    }
    return worst;
}

} // namespace umdp
