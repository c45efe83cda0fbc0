#include "linflow/features.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace linflow {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

void FlowShape::validate() const {
    if (pages < 1) throw std::invalid_argument("FlowShape: pages must be >= 1");
    if (static_cast<int>(candidates.size()) != pages) {
        throw std::invalid_argument("FlowShape: candidates must list one count per page");
    }
    for (int n : candidates) {
        if (n < 1) throw std::invalid_argument("FlowShape: every page needs >= 1 candidate");
    }
}

int FlowShape::max_candidates() const {
    return *std::max_element(candidates.begin(), candidates.end());
}

ContextEncoding ContextSchema::encode(int category) const {
    if (kind == Kind::none) return {};
    if (category < 0 || category >= categories) {
        throw std::out_of_range("ContextSchema: category out of range");
    }
    ContextEncoding enc(static_cast<std::size_t>(categories), 0.0);
    enc[static_cast<std::size_t>(category)] = 1.0;
    return enc;
}

void ContextSchema::validate() const {
    if (kind == Kind::categorical && categories < 2) {
        throw std::invalid_argument("ContextSchema: categorical context needs >= 2 categories");
    }
}

bool FlowConstraints::empty() const {
    for (const auto& page : incompatible) {
        if (!page.empty()) return false;
    }
    return true;
}

bool FlowConstraints::allowed(int page, int prev, int cur) const {
    if (page <= 0 || page >= static_cast<int>(incompatible.size())) return true;
    for (const auto& [p, c] : incompatible[static_cast<std::size_t>(page)]) {
        if (p == prev && c == cur) return false;
    }
    return true;
}

void FlowConstraints::validate(const FlowShape& shape) const {
    if (incompatible.empty()) return;
    if (static_cast<int>(incompatible.size()) != shape.pages) {
        throw std::invalid_argument("FlowConstraints: need one entry per page");
    }
    if (!incompatible[0].empty()) {
        throw std::invalid_argument("FlowConstraints: page 1 has no previous page");
    }
    for (int page = 1; page < shape.pages; ++page) {
        const int n_prev = shape.candidates[static_cast<std::size_t>(page - 1)];
        const int n_cur = shape.candidates[static_cast<std::size_t>(page)];
        for (const auto& [p, c] : incompatible[static_cast<std::size_t>(page)]) {
            if (p < 0 || p >= n_prev || c < 0 || c >= n_cur) {
                throw std::invalid_argument("FlowConstraints: incompatible pair out of range");
            }
        }
        for (int p = 0; p < n_prev; ++p) {
            bool any = false;
            for (int c = 0; c < n_cur && !any; ++c) any = allowed(page, p, c);
            if (!any) {
                throw std::invalid_argument(
                    "FlowConstraints: no feasible action on page " + std::to_string(page + 1) +
                    " after previous action " + std::to_string(p + 1));
            }
        }
    }
}

TermSet parse_formula(std::string_view formula) {
    auto tilde = formula.find('~');
    if (tilde == std::string_view::npos) {
        throw std::invalid_argument("formula: expected '<response> ~ <terms>'");
    }
    if (trim(formula.substr(0, tilde)).empty()) {
        throw std::invalid_argument("formula: missing response before '~'");
    }
    TermSet terms;
    std::string_view rhs = formula.substr(tilde + 1);
    std::size_t pos = 0;
    bool saw_term = false;
    while (pos <= rhs.size()) {
        auto plus = rhs.find('+', pos);
        std::string tok = trim(rhs.substr(pos, plus == std::string_view::npos ? rhs.size() - pos : plus - pos));
        if (!tok.empty()) {
            saw_term = true;
            if (tok == "1") {
                terms.intercept = true;
            } else if (tok == "a_i") {
                terms.current_action = true;
            } else if (tok == "x") {
                terms.context_main = true;
            } else if (tok == "x:a_i" || tok == "a_i:x") {
                terms.context_by_current = true;
            } else if (tok == "a_prev") {
                terms.previous_action = true;
            } else if (tok == "a_prev:a_i" || tok == "a_i:a_prev") {
                terms.previous_by_current = true;
            } else {
                throw std::invalid_argument("formula: unknown term '" + tok + "'");
            }
        }
        if (plus == std::string_view::npos) break;
        pos = plus + 1;
    }
    if (!saw_term) throw std::invalid_argument("formula: no terms after '~'");
    return terms;
}

ModelForm::ModelForm(int page, TermSet terms, int current_candidates, int previous_candidates,
                     int context_dim, std::vector<std::pair<int, int>> incompatible)
    : page_(page),
      terms_(terms),
      n_cur_(current_candidates),
      n_prev_(previous_candidates),
      ctx_dim_(context_dim),
      incompatible_(std::move(incompatible)) {
    if (page_ < 0) throw std::invalid_argument("ModelForm: negative page index");
    if (n_cur_ < 1) throw std::invalid_argument("ModelForm: need >= 1 current candidate");
    if (page_ == 0) {
        if (terms_.uses_previous()) {
            throw std::invalid_argument("ModelForm: page 1 cannot use previous-action terms");
        }
        if (!incompatible_.empty()) {
            throw std::invalid_argument("ModelForm: page 1 cannot have incompatibilities");
        }
        n_prev_ = 0;
    } else if (n_prev_ < 1) {
        throw std::invalid_argument("ModelForm: pages >= 2 need the previous page's candidate count");
    }
    if (terms_.uses_context() && ctx_dim_ < 1) {
        throw std::invalid_argument("ModelForm: context terms need context_dim >= 1");
    }
    if (!terms_.uses_context()) ctx_dim_ = 0;

    if (page_ > 0) {
        std::vector<char> blocked(static_cast<std::size_t>(n_prev_ * n_cur_), 0);
        for (const auto& [p, c] : incompatible_) {
            if (p < 0 || p >= n_prev_ || c < 0 || c >= n_cur_) {
                throw std::invalid_argument("ModelForm: incompatible pair out of range");
            }
            blocked[static_cast<std::size_t>(p * n_cur_ + c)] = 1;
        }
        for (int p = 0; p < n_prev_; ++p) {
            bool any = false;
            for (int c = 0; c < n_cur_ && !any; ++c) {
                any = !blocked[static_cast<std::size_t>(p * n_cur_ + c)];
            }
            if (!any) {
                throw std::invalid_argument("ModelForm: previous action " + std::to_string(p + 1) +
                                            " would have no feasible action");
            }
        }
        pbc_col_.assign(static_cast<std::size_t>(n_prev_ * n_cur_), -1);
    }

    int col = 0;
    if (terms_.intercept) col += 1;
    if (terms_.current_action) {
        off_current_ = col;
        col += n_cur_;
    }
    if (terms_.context_main) {
        off_ctx_main_ = col;
        col += ctx_dim_;
    }
    if (terms_.context_by_current) {
        off_ctx_by_cur_ = col;
        col += n_cur_ * ctx_dim_;
    }
    if (terms_.previous_action) {
        off_previous_ = col;
        col += n_prev_;
    }
    if (terms_.previous_by_current) {
        for (int p = 0; p < n_prev_; ++p) {
            for (int c = 0; c < n_cur_; ++c) {
                const auto idx = static_cast<std::size_t>(p * n_cur_ + c);
                bool blocked = !allowed(p, c);
                if (!blocked) pbc_col_[idx] = col++;
            }
        }
    }
    columns_ = col;
}

bool ModelForm::allowed(int prev, int cur) const {
    for (const auto& [p, c] : incompatible_) {
        if (p == prev && c == cur) return false;
    }
    return true;
}

std::vector<int> ModelForm::feasible_actions(std::optional<int> prev) const {
    std::vector<int> actions;
    actions.reserve(static_cast<std::size_t>(n_cur_));
    if (page_ == 0 || !prev.has_value()) {
        for (int c = 0; c < n_cur_; ++c) actions.push_back(c);
        return actions;
    }
    for (int c = 0; c < n_cur_; ++c) {
        if (allowed(*prev, c)) actions.push_back(c);
    }
    return actions;
}

void ModelForm::check_inputs(std::span<const double> context, std::optional<int> prev,
                             int action) const {
    if (action < 0 || action >= n_cur_) throw std::out_of_range("ModelForm: action out of range");
    if (page_ > 0) {
        // Forms that neither look at the previous action nor carry an
        // incompatibility mask (the independent family) accept prev = none.
        if (!prev.has_value()) {
            if (terms_.uses_previous() || !incompatible_.empty()) {
                throw std::invalid_argument("ModelForm: pages >= 2 need a previous action");
            }
        } else {
            if (*prev < 0 || *prev >= n_prev_) {
                throw std::out_of_range("ModelForm: previous action out of range");
            }
            if (!allowed(*prev, action)) {
                throw std::invalid_argument("ModelForm: action " + std::to_string(action + 1) +
                                            " is incompatible with previous action " +
                                            std::to_string(*prev + 1));
            }
        }
    } else if (prev.has_value()) {
        throw std::invalid_argument("ModelForm: page 1 takes no previous action");
    }
    if (terms_.uses_context() && static_cast<int>(context.size()) != ctx_dim_) {
        throw std::invalid_argument("ModelForm: context encoding has wrong dimension");
    }
}

FeatureVector ModelForm::encode(std::span<const double> context, std::optional<int> prev,
                                int action) const {
    FeatureVector out(static_cast<std::size_t>(columns_), 0.0);
    encode_into(context, prev, action, out);
    return out;
}

void ModelForm::encode_into(std::span<const double> context, std::optional<int> prev, int action,
                            std::span<double> out) const {
    check_inputs(context, prev, action);
    if (static_cast<int>(out.size()) != columns_) {
        throw std::invalid_argument("ModelForm: output span has wrong length");
    }
    std::fill(out.begin(), out.end(), 0.0);
    if (terms_.intercept) out[0] = 1.0;
    if (terms_.current_action) out[static_cast<std::size_t>(off_current_ + action)] = 1.0;
    if (terms_.context_main) {
        for (int c = 0; c < ctx_dim_; ++c) {
            out[static_cast<std::size_t>(off_ctx_main_ + c)] = context[static_cast<std::size_t>(c)];
        }
    }
    if (terms_.context_by_current) {
        const int base = off_ctx_by_cur_ + action * ctx_dim_;
        for (int c = 0; c < ctx_dim_; ++c) {
            out[static_cast<std::size_t>(base + c)] = context[static_cast<std::size_t>(c)];
        }
    }
    if (terms_.previous_action) out[static_cast<std::size_t>(off_previous_ + *prev)] = 1.0;
    if (terms_.previous_by_current) {
        out[static_cast<std::size_t>(pbc_col_[static_cast<std::size_t>(*prev * n_cur_ + action)])] = 1.0;
    }
}

double ModelForm::utility(std::span<const double> context, std::optional<int> prev, int action,
                          std::span<const double> weights) const {
    check_inputs(context, prev, action);
    if (static_cast<int>(weights.size()) != columns_) {
        throw std::invalid_argument("ModelForm: weight vector has wrong dimension");
    }
    double u = 0.0;
    if (terms_.intercept) u += weights[0];
    if (terms_.current_action) u += weights[static_cast<std::size_t>(off_current_ + action)];
    if (terms_.context_main) {
        for (int c = 0; c < ctx_dim_; ++c) {
            u += context[static_cast<std::size_t>(c)] * weights[static_cast<std::size_t>(off_ctx_main_ + c)];
        }
    }
    if (terms_.context_by_current) {
        const int base = off_ctx_by_cur_ + action * ctx_dim_;
        for (int c = 0; c < ctx_dim_; ++c) {
            u += context[static_cast<std::size_t>(c)] * weights[static_cast<std::size_t>(base + c)];
        }
    }
    if (terms_.previous_action) u += weights[static_cast<std::size_t>(off_previous_ + *prev)];
    if (terms_.previous_by_current) {
        u += weights[static_cast<std::size_t>(pbc_col_[static_cast<std::size_t>(*prev * n_cur_ + action)])];
    }
    return u;
}

std::vector<ColumnLabel> ModelForm::column_labels() const {
    std::vector<ColumnLabel> labels;
    labels.reserve(static_cast<std::size_t>(columns_));
    if (terms_.intercept) labels.push_back({"intercept", -1, -1, -1});
    if (terms_.current_action) {
        for (int c = 0; c < n_cur_; ++c) labels.push_back({"current_action", c, -1, -1});
    }
    if (terms_.context_main) {
        for (int c = 0; c < ctx_dim_; ++c) labels.push_back({"context_main", -1, -1, c});
    }
    if (terms_.context_by_current) {
        for (int a = 0; a < n_cur_; ++a) {
            for (int c = 0; c < ctx_dim_; ++c) labels.push_back({"context_by_current", a, -1, c});
        }
    }
    if (terms_.previous_action) {
        for (int p = 0; p < n_prev_; ++p) labels.push_back({"previous_action", -1, p, -1});
    }
    if (terms_.previous_by_current) {
        for (int p = 0; p < n_prev_; ++p) {
            for (int c = 0; c < n_cur_; ++c) {
                if (pbc_col_[static_cast<std::size_t>(p * n_cur_ + c)] >= 0) {
                    labels.push_back({"previous_by_current", c, p, -1});
                }
            }
        }
    }
    return labels;
}

std::string ColumnLabel::to_string() const {
    std::string s = term;
    if (previous >= 0) s += ":prev" + std::to_string(previous + 1);
    if (current >= 0) s += ":cur" + std::to_string(current + 1);
    if (context >= 0) s += ":ctx" + std::to_string(context + 1);
    return s;
}

std::vector<ModelForm> make_forms(FormFamily family, const FlowShape& shape,
                                  const FlowConstraints& constraints, const ContextSchema& ctx,
                                  const FormOptions& options) {
    shape.validate();
    ctx.validate();
    constraints.validate(shape);
    const bool contextual = ctx.kind != ContextSchema::Kind::none;
    const int ctx_dim = ctx.dim();

    std::vector<ModelForm> forms;
    forms.reserve(static_cast<std::size_t>(shape.pages));
    for (int page = 0; page < shape.pages; ++page) {
        TermSet terms;
        if (page == 0) {
            terms.current_action = true;
            if (contextual) terms.context_main = true;
            if (options.page1_terms) terms = *options.page1_terms;
        } else {
            terms.current_action = true;
            if (family == FormFamily::interaction) {
                terms.previous_action = true;
                terms.previous_by_current = true;
            }
            if (contextual) {
                terms.context_by_current = true;
                terms.context_main = options.context_main_on_later_pages;
            }
            if (options.later_terms) terms = *options.later_terms;
        }
        if (page == 0 && terms.uses_previous()) {
            throw std::invalid_argument("make_forms: page-1 formula cannot use previous-action terms");
        }
        if (terms.uses_context() && !contextual) {
            throw std::invalid_argument("make_forms: formula uses context but none is configured");
        }
        // Independent forms take no incompatibility mask: that family selects
        // each page with no knowledge of the page before.
        std::vector<std::pair<int, int>> pairs;
        if (family == FormFamily::interaction && page > 0 &&
            static_cast<int>(constraints.incompatible.size()) > page) {
            pairs = constraints.incompatible[static_cast<std::size_t>(page)];
        }
        forms.emplace_back(page, terms, shape.candidates[static_cast<std::size_t>(page)],
                           page > 0 ? shape.candidates[static_cast<std::size_t>(page - 1)] : 0,
                           terms.uses_context() ? ctx_dim : 0, std::move(pairs));
    }
    return forms;
}

}  // namespace linflow
