#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace linflow {

// Number of pages in the flow and candidate count per page.
struct FlowShape {
    int pages = 0;
    std::vector<int> candidates;

    void validate() const;
    int max_candidates() const;
};

// Encoded context features. Empty when the flow has no context, a single
// pass-through numeric, or a one-hot indicator block for a categorical.
using ContextEncoding = std::vector<double>;

struct ContextSchema {
    enum class Kind { none, categorical };
    Kind kind = Kind::none;
    int categories = 0;

    int dim() const { return kind == Kind::categorical ? categories : 0; }
    ContextEncoding encode(int category) const;
    void validate() const;
};

// Display exclusions: entry for page i (i >= 1) lists (prev, cur) pairs that
// may not be shown back to back. Page 0 has no previous page.
struct FlowConstraints {
    std::vector<std::vector<std::pair<int, int>>> incompatible;

    static FlowConstraints none(int pages) { return {std::vector<std::vector<std::pair<int, int>>>(static_cast<std::size_t>(pages))}; }
    bool empty() const;
    bool allowed(int page, int prev, int cur) const;
    // Throws if any (page, prev) would be left without a feasible action.
    void validate(const FlowShape& shape) const;
};

struct TermSet {
    bool intercept = true;
    bool current_action = false;
    bool context_main = false;
    bool context_by_current = false;
    bool previous_action = false;
    bool previous_by_current = false;

    bool uses_context() const { return context_main || context_by_current; }
    bool uses_previous() const { return previous_action || previous_by_current; }
};

// Parses a compact formula string such as "R ~ a_i + a_prev + a_prev:a_i".
// Recognised terms: 1, a_i, x, x:a_i, a_prev, a_prev:a_i (interaction terms
// accept either operand order). The intercept is always included.
TermSet parse_formula(std::string_view formula);

using FeatureVector = std::vector<double>;

struct ColumnLabel {
    std::string term;
    int current = -1;
    int previous = -1;
    int context = -1;

    std::string to_string() const;
};

// Per-page linear model structure: which terms enter the feature vector for
// B(context, prev, cur), plus the incompatibility mask that omits interaction
// columns and restricts the feasible action set.
//
// Column layout, fixed and deterministic: intercept | current-action one-hot |
// context main | context-by-current (row-major over (cur, ctx)) | previous-
// action one-hot | previous-by-current (row-major over (prev, cur), skipping
// incompatible pairs).
class ModelForm {
  public:
    ModelForm(int page, TermSet terms, int current_candidates, int previous_candidates,
              int context_dim, std::vector<std::pair<int, int>> incompatible = {});

    int page() const { return page_; }
    const TermSet& terms() const { return terms_; }
    int columns() const { return columns_; }
    int current_candidates() const { return n_cur_; }
    int previous_candidates() const { return n_prev_; }
    int context_dim() const { return ctx_dim_; }
    const std::vector<std::pair<int, int>>& incompatible() const { return incompatible_; }

    bool allowed(int prev, int cur) const;
    std::vector<int> feasible_actions(std::optional<int> prev) const;

    FeatureVector encode(std::span<const double> context, std::optional<int> prev, int action) const;
    void encode_into(std::span<const double> context, std::optional<int> prev, int action,
                     std::span<double> out) const;

    // Dot product of the encoded vector with `weights` without materialising
    // the vector; the hot path for selection and planning.
    double utility(std::span<const double> context, std::optional<int> prev, int action,
                   std::span<const double> weights) const;

    std::vector<ColumnLabel> column_labels() const;

  private:
    void check_inputs(std::span<const double> context, std::optional<int> prev, int action) const;

    int page_;
    TermSet terms_;
    int n_cur_;
    int n_prev_;
    int ctx_dim_;
    std::vector<std::pair<int, int>> incompatible_;
    std::vector<int> pbc_col_;  // (prev * n_cur + cur) -> column index, -1 if omitted
    int columns_ = 0;
    int off_current_ = -1;
    int off_ctx_main_ = -1;
    int off_ctx_by_cur_ = -1;
    int off_previous_ = -1;
};

struct FormOptions {
    // Whether pages >= 2 carry a context main effect in addition to the
    // context-by-current interaction.
    bool context_main_on_later_pages = true;
    // Optional formula overrides for the interaction-structured families.
    std::optional<TermSet> page1_terms;
    std::optional<TermSet> later_terms;
};

enum class FormFamily {
    independent,  // per-page model on the current action only
    interaction,  // current + previous + previous:current
};

// Builds the per-page model forms for a bandit family, wiring in context
// terms when a context is configured and the incompatibility masks for each
// page transition.
std::vector<ModelForm> make_forms(FormFamily family, const FlowShape& shape,
                                  const FlowConstraints& constraints, const ContextSchema& ctx,
                                  const FormOptions& options = {});

}  // namespace linflow
