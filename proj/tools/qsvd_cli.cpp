// Copyright 2026 The qsvd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Every subcommand writes params.json (the resolved
// configuration), its result CSVs and cost_ledger.txt under --out. Failures
// write error.json and exit with status 2.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsvd/qsvd.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out = "qsvd_out";
    std::string format = "csv";
};

struct Inputs {
    std::vector<std::string> paths;
    bool header = false;
    bool center = false;
    bool normalize = false;
};

struct Routine {
    double gamma = 0.0316;
    double eps = 0.01;
    double eta = 0.01;
    double delta = 0.1;
    double xi = 0.0;
    double theta = 0.0;
    double p = 0.0;
    std::size_t k = 0;
    std::string sve_scale = "absolute";
    double mu = 0.0;
    std::string norm = "l2";
    std::string theta_rule = "midpoint";
    bool binary_search = false;
};

struct Corpus {
    std::string path;
    bool keep_stopwords = false;
    std::size_t min_df = 2;
    double max_df_ratio = 0.5;
};

struct Extra {
    std::size_t N = 0;
    std::string mode;
    std::string side = "right";
    std::size_t trials = 0;  // 0: per-command default
    std::string labels;
    std::size_t neighbors = 7;
    std::size_t folds = 10;
    bool plain_folds = false;
    std::vector<double> grid;
    std::vector<std::size_t> ladder;
    std::string query;
    double beta_offset = 0.0;
    std::string gap_rule = "half_gap";
    std::optional<double> rp_mu, rp_spectral, rp_frobenius, rp_theta, rp_eps, rp_p, rp_delta, rp_gamma, rp_eta;
    std::optional<std::size_t> rp_k, rp_n, rp_m, rp_rank;
};

class Runner {
public:
    Runner(const Globals& g, const Inputs& in, const Routine& r, const Corpus& c, const Extra& x)
        : g_(g), in_(in), r_(r), c_(c), x_(x), out_(g.out) {}

    qsvd::CostLedger ledger;
    json results = json::object();

    qsvd::MatrixFormat format() const { return qsvd::parse_matrix_format(g_.format); }

    qsvd::DataMatrix load() const {
        if (in_.paths.empty()) throw qsvd::UsageError("--input is required");
        std::vector<fs::path> paths(in_.paths.begin(), in_.paths.end());
        auto m = qsvd::load_matrix_stack(paths, format(), {in_.header});
        if (in_.center || in_.normalize) m = qsvd::preprocess(m, {in_.center, in_.normalize});
        return m;
    }

    qsvd::SveConfig sve() const {
        qsvd::SveConfig s;
        if (r_.sve_scale == "absolute") s.scale = qsvd::SveScale::absolute;
        else if (r_.sve_scale == "relative") s.scale = qsvd::SveScale::relative_to_mu;
        else throw qsvd::UsageError("--sve-scale must be absolute or relative");
        s.mu = r_.mu;
        return s;
    }

    qsvd::TomographyNorm norm() const {
        if (r_.norm == "l2") return qsvd::TomographyNorm::l2;
        if (r_.norm == "linf") return qsvd::TomographyNorm::linf;
        throw qsvd::UsageError("--norm must be l2 or linf");
    }

    qsvd::ThetaPlacement placement() const {
        if (r_.theta_rule == "midpoint") return qsvd::ThetaPlacement::midpoint;
        if (r_.theta_rule == "last") return qsvd::ThetaPlacement::last_retained;
        throw qsvd::UsageError("--theta-rule must be midpoint or last");
    }

    qsvd::FitOptions fit_options() const {
        qsvd::FitOptions o;
        o.gamma = r_.gamma;
        o.eps = r_.eps;
        o.delta = r_.delta;
        o.xi = r_.xi;
        o.seed = g_.seed;
        o.sve = sve();
        o.norm = norm();
        o.placement = placement();
        o.binary_search = r_.binary_search;
        o.eta = r_.eta;
        return o;
    }

    std::optional<qsvd::FitTarget> target() const {
        const int given = (r_.p > 0.0) + (r_.k > 0) + (r_.theta > 0.0);
        if (given > 1) throw qsvd::UsageError("give at most one of --p, --k, --theta");
        if (r_.p > 0.0) return qsvd::FitTarget::variance(r_.p);
        if (r_.k > 0) return qsvd::FitTarget::components(r_.k);
        if (r_.theta > 0.0) return qsvd::FitTarget::threshold(r_.theta);
        return std::nullopt;
    }

    qsvd::ContingencyTable corpus_table() const {
        std::ifstream f(c_.path);
        if (!f) throw qsvd::IoError("cannot open corpus " + c_.path);
        std::vector<std::vector<std::string>> docs;
        std::string line;
        while (std::getline(f, line))
            if (!line.empty()) docs.push_back(qsvd::tokenize(line));
        qsvd::ContingencyFilters fl;
        fl.drop_stopwords = !c_.keep_stopwords;
        fl.min_doc_freq = c_.min_df;
        fl.max_doc_ratio = c_.max_df_ratio;
        return qsvd::build_contingency(docs, fl);
    }

    qsvd::AmplitudeMode amplitude_mode(const std::string& fallback) const {
        const std::string m = x_.mode.empty() ? fallback : x_.mode;
        if (m == "exact") return qsvd::AmplitudeMode::exact;
        if (m == "additive") return qsvd::AmplitudeMode::additive;
        if (m == "relative") return qsvd::AmplitudeMode::relative;
        throw qsvd::UsageError("--mode must be exact, additive or relative");
    }

    void save(const std::string& name, const std::string& text) const {
        qsvd::CsvWriter::write_text(out_ / name, text);
    }

    // -- subcommands ---------------------------------------------------------

    void preprocess() {
        const auto m = load();
        if (format() == qsvd::MatrixFormat::csv) qsvd::write_matrix_csv(out_ / "matrix.csv", m.values());
        else qsvd::save_raw_f64(out_ / "matrix.f64", m.values());
        qsvd::CsvWriter w({"rows", "cols", "frobenius", "nnz", "sigma_max", "centered", "normalized"});
        w.row(m.rows(), m.cols(), m.frobenius(), m.nnz(), qsvd::largest_singular_value(m.values()),
              int(m.provenance().row_mean_centered), int(m.provenance().spectral_normalized));
        save("metadata.csv", w.str());
    }

    void svd() {
        const auto s = qsvd::compute_svd(load());
        qsvd::export_svd_model(s, out_ / "svd");
        save("fsr.csv", qsvd::fsr_distribution_csv(s));
        results["rank"] = s.rank();
    }

    void sample_fsr() {
        const auto s = qsvd::compute_svd(load());
        const auto N = x_.N ? x_.N : qsvd::wald_sample_size(r_.gamma);
        results["N"] = N;
        const auto sample = qsvd::sample_factor_scores(s, r_.gamma, r_.eps, N, g_.seed, sve());
        ledger.append(sample.cost);
        qsvd::CsvWriter w({"sigma_hat", "count", "wald_ratio", "factor_score", "sigma_ratio",
                           "multiplicity", "reported"});
        for (const auto& d : sample.draws)
            w.row(d.sigma_hat, d.count, d.wald_ratio, d.factor_score, d.sigma_ratio, d.multiplicity,
                  int(d.reported));
        save("samples.csv", w.str());
        if (r_.p > 0.0) {
            const auto sel = qsvd::select_k_for_variance(sample, r_.p, placement());
            const auto exact_p = sample.spectrum.mass_at_or_above(sel.last_sigma_hat);
            qsvd::CsvWriter ws({"p_target", "k", "p_est", "p_exact_at_k", "theta", "last_sigma_hat"});
            ws.row(r_.p, sel.k, sel.p_est, exact_p, sel.theta, sel.last_sigma_hat);
            save("selection.csv", ws.str());
        }
    }

    void check_sum() {
        const auto s = qsvd::compute_svd(load());
        const auto r = qsvd::check_fsr_sum(s, r_.theta, r_.eps, r_.eta, amplitude_mode("relative"), g_.seed, sve());
        ledger.append(r.cost);
        qsvd::CsvWriter w({"theta", "estimate", "exact", "undefined_relative"});
        w.row(r_.theta, r.estimate, r.exact, int(r.undefined_relative));
        save("check_sum.csv", w.str());
    }

    void find_threshold() {
        const auto s = qsvd::compute_svd(load());
        const bool exact = x_.mode == "exact";
        const auto r = qsvd::binary_search_threshold(s, r_.p, r_.eps, r_.eta, g_.seed,
                                                     exact ? qsvd::AmplitudeMode::exact : qsvd::AmplitudeMode::additive,
                                                     r_.mu);
        ledger.append(r.cost);
        qsvd::CsvWriter w({"p_target", "theta", "found", "iterations", "max_iterations", "early_exit"});
        w.row(r_.p, r.theta ? *r.theta : -1.0, int(r.theta.has_value()), r.iterations, r.max_iterations,
              int(r.early_exit));
        save("threshold.csv", w.str());
        qsvd::CsvWriter wp({"iteration", "tau", "exact", "estimate"});
        for (std::size_t i = 0; i < r.probes.size(); ++i)
            wp.row(i + 1, r.probes[i].tau, r.probes[i].exact, r.probes[i].estimate);
        save("probes.csv", wp.str());
    }

    void count_k() {
        const auto s = qsvd::compute_svd(load());
        const bool rel = x_.mode == "relative";
        const auto r = qsvd::count_retained(s, r_.theta, r_.eps,
                                            rel ? qsvd::CountMode::relative : qsvd::CountMode::exact, r_.eta,
                                            g_.seed, sve());
        ledger.append(r.cost);
        qsvd::CsvWriter w({"theta", "estimate", "exact", "undefined_relative"});
        w.row(r_.theta, r.estimate, r.exact, int(r.undefined_relative));
        save("count.csv", w.str());
    }

    void extract_topk() {
        const auto s = qsvd::compute_svd(load());
        qsvd::Side side;
        if (x_.side == "left") side = qsvd::Side::left;
        else if (x_.side == "right") side = qsvd::Side::right;
        else if (x_.side == "both") side = qsvd::Side::both;
        else throw qsvd::UsageError("--side must be left, right or both");
        qsvd::ExtractionOptions eo;
        eo.sve = sve();
        const auto r = qsvd::extract_topk(s, r_.theta, r_.eps, r_.delta, side, norm(), g_.seed, eo);
        ledger.append(r.cost);
        qsvd::CsvWriter w({"k", "theta", "epsilon", "delta", "p_retained", "shots_per_vector",
                           "measurements_used"});
        w.row(r.k, r.theta, r.epsilon, r.delta, r.p_retained, r.shots_per_vector, r.measurements_used);
        save("extraction.csv", w.str());
        qsvd::CsvWriter ws({"index", "sigma_hat", "factor_score", "ratio", "q"});
        for (Eigen::Index j = 0; j < r.sigma_hats.size(); ++j)
            ws.row(r.indices[static_cast<std::size_t>(j)], r.sigma_hats(j), r.factor_scores(j), r.ratios(j),
                   r.measurement_distribution(j));
        save("sigmas.csv", ws.str());
        if (r.U_hat.size()) qsvd::write_matrix_csv(out_ / "U_hat.csv", r.U_hat);
        if (r.V_hat.size()) qsvd::write_matrix_csv(out_ / "V_hat.csv", r.V_hat);
    }

    void pca() {
        const auto m = load();
        const auto s = qsvd::compute_svd(m);
        const auto model = qsvd::pca_fit(s, target().value_or(qsvd::FitTarget::variance(0.85)), fit_options());
        ledger.append(model.cost);
        model.export_to(out_ / "model");
        const auto proj = qsvd::pca_transform_matrix(model, m);
        const double p_exact_k = s.ratios().head(static_cast<Eigen::Index>(std::min<std::size_t>(model.k, s.rank()))).sum();
        qsvd::CsvWriter w({"k", "p_selected", "p_retained", "p_exact", "p_exact_top_k", "theta", "epsilon",
                           "delta", "gamma", "frobenius", "transform_p", "xi_bound", "measurements_used"});
        w.row(model.k, model.p_selected, model.p_retained, model.p_exact, p_exact_k, model.theta, model.epsilon,
              model.delta, model.gamma, m.frobenius(), proj.p, proj.xi_bound, model.measurements_used);
        save("pca.csv", w.str());
    }

    void ca() {
        qsvd::ContingencyTable t;
        if (!c_.path.empty()) {
            t = corpus_table();
        } else {
            const auto m = load();
            t.counts = m.values();
        }
        const auto model = qsvd::ca_fit(t, target().value_or(qsvd::FitTarget::components(2)), fit_options());
        ledger.append(model.cost);
        model.export_to(out_ / "model");
        qsvd::CsvWriter w({"k", "theta", "epsilon", "delta", "p_retained", "bound_row", "bound_col",
                           "dropped_rows", "dropped_cols"});
        w.row(model.k, model.theta, model.epsilon, model.delta, model.p_retained, model.bound_row,
              model.bound_col, model.table.dropped_rows.size(), model.table.dropped_cols.size());
        save("ca.csv", w.str());
    }

    qsvd::DataMatrix term_document() const {
        if (!c_.path.empty()) {
            const auto t = corpus_table();
            return qsvd::DataMatrix(t.counts.transpose());
        }
        return load();
    }

    qsvd::LsaModel fit_lsa(const qsvd::DataMatrix& a) {
        const auto model = qsvd::lsa_fit(a, target(), fit_options());
        ledger.append(model.cost);
        return model;
    }

    void lsa() {
        const auto model = fit_lsa(term_document());
        model.export_to(out_ / "model");
        qsvd::CsvWriter w({"k", "theta", "epsilon", "delta", "bound_US", "bound_US_half", "bound_US_inv"});
        w.row(model.k, model.theta, model.epsilon, model.delta, model.bound_us.tight,
              model.bound_us_half.tight, model.bound_us_inv);
        save("lsa.csv", w.str());
    }

    void fold_query() {
        const auto a = term_document();
        const auto model = fit_lsa(a);
        if (x_.query.empty()) throw qsvd::UsageError("--query is required");
        const auto q = qsvd::load_matrix(x_.query, qsvd::MatrixFormat::csv);
        std::vector<std::string> hdr{"query"};
        for (std::size_t j = 0; j < model.k; ++j) hdr.push_back("c" + std::to_string(j + 1));
        qsvd::CsvWriter w(hdr);
        qsvd::CsvWriter ws({"query", "document", "cosine"});
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const qsvd::Vector x = q.values().row(i).transpose();
            const auto f = qsvd::lsa_fold_query(model, x);
            std::vector<std::string> cells{std::to_string(i)};
            for (Eigen::Index j = 0; j < f.size(); ++j) cells.push_back(qsvd::format_double(f(j)));
            w.row_strings(cells);
            const qsvd::Vector scaled = f.cwiseProduct(model.sigmas);
            const auto sim = qsvd::similarities(scaled, model.doc_space);
            for (Eigen::Index d = 0; d < sim.size(); ++d) ws.row(i, d, sim(d));
        }
        save("folded.csv", w.str());
        save("similarities.csv", ws.str());
    }

    void representability() {
        const auto m = load();
        const auto s = qsvd::compute_svd(m);
        auto grid = x_.grid;
        if (grid.empty())
            for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
        const auto rows = qsvd::pca_representability(m, s, grid, x_.beta_offset);
        qsvd::CsvWriter w({"p", "k_p", "alpha", "beta", "zero_rows"});
        double mean = 0.0;
        for (const auto& r : rows) {
            w.row(r.p, r.k_p, r.alpha, r.beta, r.zero_rows);
            mean += r.alpha;
        }
        results["alpha_mean"] = mean / static_cast<double>(rows.size());
        save("representability.csv", w.str());
    }

    void runtime_params() {
        const auto m = load();
        const auto s = qsvd::compute_svd(m);
        const auto mu = qsvd::compute_mu(m);
        std::size_t k = r_.k;
        if (!k) {
            const double p = r_.p > 0.0 ? r_.p : 0.85;
            double acc = 0.0;
            const auto ratios = s.ratios();
            while (k < static_cast<std::size_t>(ratios.size()) && acc < p * (1.0 - 1e-12))
                acc += ratios(static_cast<Eigen::Index>(k++));
        }
        const auto half = qsvd::thresholding_epsilon(s.sigmas, k, qsvd::GapRule::half_gap);
        const auto full = qsvd::thresholding_epsilon(s.sigmas, k, qsvd::GapRule::full_gap);
        const double sk = s.sigmas(static_cast<Eigen::Index>(k - 1));
        const double below = static_cast<Eigen::Index>(k) < s.rank() ? s.sigmas(static_cast<Eigen::Index>(k)) : 0.0;
        const double p_at_k = s.ratios().head(static_cast<Eigen::Index>(k)).sum();
        double delta = -1.0;
        if (r_.xi > 0.0) delta = qsvd::estimate_delta(r_.xi, k, half.value, s.sigma_max());
        qsvd::CsvWriter w({"mu", "best_p", "frobenius_won", "spectral", "frobenius", "k", "p_at_k",
                           "theta_midpoint", "theta_last", "eps_half_gap", "eps_full_gap", "delta", "n", "m"});
        w.row(mu.mu, mu.best_p, int(mu.frobenius_won), s.sigma_max(), m.frobenius(), k, p_at_k,
              0.5 * (sk + below), sk, half.value, full.value, delta, m.rows(), m.cols());
        if (half.zero_gap) results["warning"] = half.warning;
        save("runtime_params.csv", w.str());
    }

    void cost_report() {
        qsvd::RuntimeParams rp;
        rp.mu = x_.rp_mu;
        rp.spectral = x_.rp_spectral;
        rp.frobenius = x_.rp_frobenius;
        rp.theta = x_.rp_theta;
        rp.thresholding_eps = x_.rp_eps;
        rp.p = x_.rp_p;
        rp.delta = x_.rp_delta;
        rp.gamma = x_.rp_gamma;
        rp.eta = x_.rp_eta;
        rp.k = x_.rp_k;
        rp.n = x_.rp_n;
        rp.m = x_.rp_m;
        rp.rank = x_.rp_rank;
        save("cost_report.csv", qsvd::cost_report_csv(rp));
        if (!x_.ladder.empty()) {
            const auto l = qsvd::cost_ladder(rp, x_.ladder);
            save("ladder.csv", l.csv);
            results["crossover_n"] = l.crossover ? json(*l.crossover) : json(nullptr);
        }
    }

    void coupon() {
        const auto s = qsvd::compute_svd(load());
        double theta = r_.theta;
        if (!(theta > 0.0)) {
            const auto k = r_.k ? r_.k : static_cast<std::size_t>(s.rank());
            theta = sve().round(s, r_.eps).sigma_hat[std::min<std::size_t>(k, s.rank()) - 1];
        }
        const auto c = qsvd::coupon_collector_trials(s, theta, r_.eps, x_.trials, g_.seed, sve());
        qsvd::CsvWriter w({"k", "theta", "epsilon", "trials", "mean", "std", "benchmark"});
        w.row(c.k, theta, r_.eps, x_.trials, c.mean, c.std, c.benchmark);
        save("coupon.csv", w.str());
    }

    void perturb() {
        const auto m = load();
        const qsvd::SeedStream seeds(g_.seed);
        qsvd::CsvWriter w({"trial", "frobenius_error", "bound"});
        for (std::size_t t = 0; t < x_.trials; ++t) {
            const qsvd::Matrix p = qsvd::perturb_matrix_frobenius(m.values(), r_.xi, seeds.child("perturb", t));
            w.row(t, (p - m.values()).norm(), r_.xi);
            if (t == 0) qsvd::write_matrix_csv(out_ / "perturbed_first.csv", p);
        }
        save("perturb.csv", w.str());
    }

    qsvd::KnnOptions knn() const {
        qsvd::KnnOptions o;
        o.neighbors = x_.neighbors;
        o.folds = x_.folds;
        o.seed = g_.seed;
        o.stratified = !x_.plain_folds;
        return o;
    }

    std::vector<int> labels() const {
        if (x_.labels.empty()) throw qsvd::UsageError("--labels is required");
        return qsvd::load_labels(x_.labels);
    }

    void knn_eval() {
        const auto m = load();
        const auto r = qsvd::knn_cv(m.values(), labels(), knn());
        qsvd::CsvWriter w({"fold", "accuracy"});
        for (std::size_t f = 0; f < r.per_fold.size(); ++f) w.row(f, r.per_fold[f]);
        save("knn_folds.csv", w.str());
        qsvd::CsvWriter ws({"accuracy", "neighbors", "folds"});
        ws.row(r.accuracy, x_.neighbors, x_.folds);
        save("knn.csv", ws.str());
    }

    void sweep() {
        const auto m = load();
        const auto lab = labels();
        const auto model = qsvd::pca_fit(qsvd::compute_svd(m), target().value_or(qsvd::FitTarget::variance(0.85)),
                                         fit_options());
        ledger.append(model.cost);
        auto grid = x_.grid;
        if (grid.empty()) grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
        const auto r = qsvd::accuracy_vs_error_sweep(m, lab, model, grid, x_.trials, g_.seed, knn());
        save("sweep.csv", r.csv());
        qsvd::CsvWriter w({"k", "spearman_rho", "p_value"});
        w.row(model.k, r.trend.rho, r.trend.p_value);
        save("trend.csv", w.str());
    }

    void fsr_report() {
        const auto s = qsvd::compute_svd(load());
        qsvd::fsr_distribution_report(s, out_ / "fsr.csv");
    }

private:
    const Globals& g_;
    const Inputs& in_;
    const Routine& r_;
    const Corpus& c_;
    const Extra& x_;
    fs::path out_;
};

/// Numeric options are recorded as JSON numbers, unset ones as null and
/// everything else verbatim.
json typed_value(const CLI::Option* opt, const std::string& text) {
    const std::string type = opt->get_type_name();
    const bool numeric = type.find("FLOAT") != std::string::npos || type.find("INT") != std::string::npos;
    if (text.empty()) return nullptr;
    if (numeric && json::accept(text)) {
        json v = json::parse(text);
        if (v.is_number()) return v;
    }
    return text;
}

json option_values(const CLI::App* app) {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help") continue;
        if (opt->get_expected_max() == 0) {
            j[name] = opt->count() > 0;
        } else if (opt->get_expected_max() > 1) {
            json list = json::array();
            if (opt->count() > 0)
                for (const auto& item : opt->results()) list.push_back(typed_value(opt, item));
            j[name] = std::move(list);
        } else if (opt->count() > 0) {
            const auto& res = opt->results();
            j[name] = typed_value(opt, res.empty() ? "" : res.back());
        } else {
            j[name] = typed_value(opt, opt->get_default_str());
        }
    }
    return j;
}

void write_json(const fs::path& path, const json& j) {
    qsvd::CsvWriter::write_text(path, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical simulator of quantum SVD routines for PCA, CA and LSA"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    Globals g;
    Inputs in;
    Routine r;
    Corpus c;
    Extra x;
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--format", g.format, "Input matrix format: csv, idx or raw_f64");

    auto add_inputs = [&](CLI::App* s) {
        s->add_option("--input", in.paths, "Matrix file(s); several files are stacked vertically");
        s->add_flag("--header", in.header, "Skip one header line in csv input");
        s->add_flag("--center", in.center, "Center every column");
        s->add_flag("--normalize", in.normalize, "Divide by the largest singular value");
    };
    auto add_sve = [&](CLI::App* s) {
        s->add_option("--eps", r.eps, "Singular value estimation resolution");
        s->add_option("--sve-scale", r.sve_scale, "absolute or relative (grid scaled by mu)");
        s->add_option("--mu", r.mu, "mu(A) for the grid and cost expressions (0: ||A||_F)");
    };
    auto add_target = [&](CLI::App* s) {
        s->add_option("--p", r.p, "Target explained variance");
        s->add_option("--k", r.k, "Target number of components");
        s->add_option("--theta", r.theta, "Singular value threshold");
    };
    auto add_fit = [&](CLI::App* s) {
        add_inputs(s);
        add_sve(s);
        add_target(s);
        s->add_option("--gamma", r.gamma, "Factor score ratio precision");
        s->add_option("--delta", r.delta, "Tomography precision");
        s->add_option("--xi", r.xi, "Frobenius budget; overrides --delta via xi sqrt(p)/sqrt(2k)");
        s->add_option("--norm", r.norm, "Tomography norm: l2 or linf");
        s->add_option("--theta-rule", r.theta_rule, "midpoint or last");
        s->add_flag("--binary-search", r.binary_search, "Select theta by binary search");
        s->add_option("--eta", r.eta, "Amplitude estimation precision");
    };
    auto add_corpus = [&](CLI::App* s) {
        s->add_option("--corpus", c.path, "Text file, one document per line");
        s->add_flag("--keep-stopwords", c.keep_stopwords, "Do not drop English stop words");
        s->add_option("--min-df", c.min_df, "Minimum document frequency");
        s->add_option("--max-df-ratio", c.max_df_ratio, "Maximum document frequency ratio");
    };
    auto add_knn = [&](CLI::App* s) {
        s->add_option("--labels", x.labels, "Label file (csv column or idx1)");
        s->add_option("--neighbors", x.neighbors, "Number of neighbours");
        s->add_option("--folds", x.folds, "Cross-validation folds");
        s->add_flag("--plain-folds", x.plain_folds, "Random instead of stratified folds");
    };

    std::map<std::string, void (Runner::*)()> dispatch;
    auto sub = [&](const char* name, const char* help, void (Runner::*fn)()) {
        dispatch[name] = fn;
        return app.add_subcommand(name, help);
    };

    auto* s = sub("preprocess", "Center and/or normalize a matrix", &Runner::preprocess);
    add_inputs(s);
    s = sub("svd", "Exact SVD oracle export", &Runner::svd);
    add_inputs(s);
    s = sub("sample-fsr", "Factor score ratio sampling", &Runner::sample_fsr);
    add_inputs(s);
    add_sve(s);
    s->add_option("--gamma", r.gamma, "Ratio precision");
    s->add_option("--N", x.N, "Sample size (0: Wald size with z = 2)");
    s->add_option("--p", r.p, "Also select k for this explained variance");
    s->add_option("--theta-rule", r.theta_rule, "midpoint or last");
    s = sub("check-sum", "Check on the factor score ratios' sum", &Runner::check_sum);
    add_inputs(s);
    add_sve(s);
    s->add_option("--theta", r.theta, "Threshold")->required();
    s->add_option("--eta", r.eta, "Amplitude estimation precision");
    s->add_option("--mode", x.mode, "exact, additive or relative (default relative)");
    s = sub("find-threshold", "Binary search for the singular value threshold", &Runner::find_threshold);
    add_inputs(s);
    s->add_option("--p", r.p, "Target explained variance")->required();
    s->add_option("--eps", r.eps, "Resolution");
    s->add_option("--eta", r.eta, "Precision");
    s->add_option("--mu", r.mu, "mu(A) (0: ||A||_F)");
    s->add_option("--mode", x.mode, "exact for noise-free probes");
    s = sub("count-k", "Reduced rank estimation", &Runner::count_k);
    add_inputs(s);
    add_sve(s);
    s->add_option("--theta", r.theta, "Threshold")->required();
    s->add_option("--eta", r.eta, "Relative precision");
    s->add_option("--mode", x.mode, "exact or relative");
    s = sub("extract-topk", "Top-k singular vector extraction", &Runner::extract_topk);
    add_inputs(s);
    add_sve(s);
    s->add_option("--theta", r.theta, "Threshold")->required();
    s->add_option("--delta", r.delta, "Tomography precision");
    s->add_option("--side", x.side, "left, right or both");
    s->add_option("--norm", r.norm, "l2 or linf");
    s = sub("pca", "PCA model extraction", &Runner::pca);
    add_fit(s);
    s = sub("ca", "Correspondence analysis", &Runner::ca);
    add_fit(s);
    add_corpus(s);
    s = sub("lsa", "Latent semantic analysis", &Runner::lsa);
    add_fit(s);
    add_corpus(s);
    s = sub("fold-query", "Fold query vectors into an LSA model", &Runner::fold_query);
    add_fit(s);
    add_corpus(s);
    s->add_option("--query", x.query, "CSV file, one query word-count vector per row");
    s = sub("representability", "PCA-representability alpha over a p grid", &Runner::representability);
    add_inputs(s);
    s->add_option("--p-grid", x.grid, "Grid of p values")->delimiter(',');
    s->add_option("--beta-offset", x.beta_offset, "beta = p + offset");
    s = sub("runtime-params", "Run-time parameters of a dataset", &Runner::runtime_params);
    add_inputs(s);
    s->add_option("--p", r.p, "Explained variance defining k (default 0.85)");
    s->add_option("--k", r.k, "Number of components");
    s->add_option("--xi", r.xi, "Frobenius budget for delta");
    s = sub("cost-report", "Evaluate the cost expressions", &Runner::cost_report);
    s->add_option("--mu", x.rp_mu, "mu(A)");
    s->add_option("--spectral", x.rp_spectral, "||A||");
    s->add_option("--frobenius", x.rp_frobenius, "||A||_F");
    s->add_option("--theta", x.rp_theta, "theta");
    s->add_option("--eps", x.rp_eps, "thresholding eps");
    s->add_option("--p", x.rp_p, "retained variance");
    s->add_option("--delta", x.rp_delta, "tomography precision");
    s->add_option("--gamma", x.rp_gamma, "ratio precision");
    s->add_option("--eta", x.rp_eta, "amplitude precision (default gamma)");
    s->add_option("--k", x.rp_k, "components");
    s->add_option("--n", x.rp_n, "rows");
    s->add_option("--m", x.rp_m, "columns");
    s->add_option("--rank", x.rp_rank, "rank (default min(n, m))");
    s->add_option("--ladder", x.ladder, "Sample counts for the scaling ladder")->delimiter(',');
    s = sub("coupon", "Coupon collector experiment", &Runner::coupon);
    add_inputs(s);
    add_sve(s);
    s->add_option("--theta", r.theta, "Threshold (default: from --k)");
    s->add_option("--k", r.k, "Components (default: rank)");
    s->add_option("--trials", x.trials, "Trials");
    s = sub("perturb", "Truncated Gaussian Frobenius perturbation", &Runner::perturb);
    add_inputs(s);
    s->add_option("--xi", r.xi, "Frobenius budget")->required();
    s->add_option("--trials", x.trials, "Perturbations drawn");
    s = sub("knn-eval", "k-NN cross-validation", &Runner::knn_eval);
    add_inputs(s);
    add_knn(s);
    s = sub("sweep", "Accuracy under increasing perturbation", &Runner::sweep);
    add_fit(s);
    add_knn(s);
    s->add_option("--xi-grid", x.grid, "Grid of xi values")->delimiter(',');
    s->add_option("--trials", x.trials, "Trials per grid point");
    s = sub("fsr-report", "Factor score ratio distribution", &Runner::fsr_report);
    add_inputs(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    CLI::App* used = app.get_subcommands().front();
    const std::string cmd = used->get_name();
    if (x.trials == 0) x.trials = cmd == "coupon" ? 1000 : (cmd == "perturb" ? 2000 : 3);

    const fs::path out(g.out);
    json params;
    params["command"] = cmd;
    params["global"] = option_values(&app);
    params["options"] = option_values(used);
    Runner runner(g, in, r, c, x);
    runner.results["trials"] = x.trials;
    try {
        fs::create_directories(out);
        (runner.*dispatch.at(cmd))();
        params["resolved"] = runner.results;
        write_json(out / "params.json", params);
        qsvd::CsvWriter::write_text(out / "cost_ledger.txt", runner.ledger.text());
    } catch (const qsvd::Error& e) {
        write_json(out / "params.json", params);
        write_json(out / "error.json", json{{"command", cmd}, {"error", e.kind()}, {"message", e.what()}});
        std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        write_json(out / "error.json", json{{"command", cmd}, {"error", "internal"}, {"message", e.what()}});
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
