#pragma once

#include "umdp/abstraction.hpp"
#include "umdp/geometry.hpp"
#include "umdp/ltlf.hpp"
#include "umdp/types.hpp"

#include <cstdint>
#include <vector>

namespace umdp {

enum class BackupMode { Pessimistic, Optimistic };

/// Value function on the implicit product of abstraction states with DFA
/// states.  Accepting columns are pinned to 1 on safe states, unsafe
/// state rows are identically 0 (the paper's off-safe convention wins at
/// the unsafe-and-accepting corner, which no backup ever reads).
struct ValueField {
    Eigen::MatrixXd v; // states x dfa states
    int step = 0;
};

/// v_0 = acceptance indicator.
ValueField initial_value_field(Index num_states, const std::vector<char>& state_safe, const Dfa& dfa);

/// Time-varying Markovian strategy on the product, stored per cell of the
/// partition (unsafe cells hold the default action 0).
struct Strategy {
    Index horizon = 0;
    Index num_cells = 0;
    int num_dfa_states = 0;
    std::vector<std::uint16_t> actions; // t-major, cell-minor, dfa-state-innermost

    int at(Index t, Index cell, int z) const {
        return actions[(static_cast<std::size_t>(t) * num_cells + cell) * num_dfa_states + z];
    }
};

struct BoundsPair {
    Vec p_lo; // per cell
    Vec p_hi;
    double gap = 0.0; // max over safe cells
};

/// Product-state bookkeeping shared by the backups: per abstraction state
/// its label and safety flag, plus the cell of each state (for strategies).
struct ProductView {
    Index num_states = 0;
    bool reduced = false; // states are safe indices (+ s_unsafe last) instead of cells
    std::vector<Label> state_labels;
    std::vector<char> state_safe;
    std::vector<Index> cell_of_state; // -1 for s_unsafe
};

ProductView make_product_view(const Smdp& smdp);
ProductView make_product_view(const Imdp& imdp);

/// One robust Bellman step on the product.  Writes the successor field
/// into `out` and optionally records the per-(state, z) argmax actions.
void backup_smdp(const ValueField& in, const Smdp& smdp, const ProductView& view, const Dfa& dfa,
                 BackupMode mode, ValueField& out, std::vector<std::uint16_t>* argmax, int threads);
void backup_imdp(const ValueField& in, const Imdp& imdp, const ProductView& view, const Dfa& dfa,
                 BackupMode mode, ValueField& out, std::vector<std::uint16_t>* argmax, int threads);

struct RdpOutput {
    BoundsPair bounds;
    Strategy strategy;            // pessimistic-derived (the exported controller)
    Strategy optimistic_strategy; // computed for diagnostics only
    ValueField final_lo;          // v_T under the pessimistic backups
    ValueField final_hi;
};

RdpOutput rdp_run(const Smdp& smdp, const Dfa& dfa, Index horizon, int threads = 1);
RdpOutput rdp_run(const Imdp& imdp, const Dfa& dfa, Index horizon, int threads = 1);

/// Online refinement of the product strategy to the continuous system:
/// tracks the DFA state from observed labels and answers with the stored
/// action.  Out-of-domain states flag the trajectory and fall back to the
/// default action.
class Controller {
public:
    Controller(const Strategy* strategy, const Partition* partition, const Dfa* dfa,
               const RegionSet* regions, int default_action = 0)
        : strategy_(strategy), partition_(partition), dfa_(dfa), regions_(regions),
          default_action_(default_action) {
        reset();
    }

    void reset();
    /// Consume (t, x_t): advances the DFA by L(x_t) and picks the action.
    int next_action(Index t, const Vec& x);

    int dfa_state() const { return z_; }
    bool accepted() const { return dfa_->is_accepting(z_); }
    bool left_domain() const { return left_domain_; }
    const RegionSet& regions() const { return *regions_; }
    const Dfa& dfa() const { return *dfa_; }

private:
    const Strategy* strategy_;
    const Partition* partition_;
    const Dfa* dfa_;
    const RegionSet* regions_;
    int default_action_;
    int z_ = 0;
    bool left_domain_ = false;
};

Controller refine_controller(const Strategy& strategy, const Partition& partition, const Dfa& dfa,
                             const RegionSet& regions, int default_action = 0);

} // namespace umdp
