#include "experiments.hpp"

#include "scc/cost.hpp"
#include "scc/error.hpp"
#include "scc/ewf.hpp"
#include "scc/io.hpp"
#include "scc/skorohod.hpp"
#include "scc/timechange.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace scc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs a config-reading step; anything that goes wrong is a config error.
template <class F>
auto config_step(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigNotFound || e.kind() == ErrorKind::ConfigInvalid) throw;
        throw Error(ErrorKind::ConfigInvalid, what + ": " + std::string(error_class(e.kind())) + ": " + e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, what + ": " + e.what());
    }
}

json resolve(const Context& ctx, const json& j, const std::string& what) {
    if (j.is_string()) return read_json_file(ctx.base_dir / j.get<std::string>());
    if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, what + " must be a file name or an object");
    return j;
}

ProblemInstance load_instance(const Context& ctx, Outcome& out) {
    return config_step("instance", [&] {
        const json j = resolve(ctx, ctx.config.at("instance"), "instance");
        auto inst = instance_from_json(j);
        out.inputs["instance"] = to_json(inst);
        return inst;
    });
}

SimGrid load_grid(const Context& ctx, Outcome& out) {
    return config_step("grid", [&] {
        const json& g = ctx.config.at("grid");
        SimGrid grid{g.at("dt").get<double>(), g.at("horizon").get<double>(), g.value("seed", std::uint64_t{1}),
                     g.value("paths", std::int64_t{1})};
        if (ctx.seed) grid.seed = *ctx.seed;
        grid.validate();
        if (grid.paths < 1) throw Error(ErrorKind::InvalidArgument, "paths must be positive");
        out.inputs["grid"] = {{"dt", grid.dt}, {"horizon", grid.horizon}, {"seed", grid.seed}, {"paths", grid.paths}};
        return grid;
    });
}

Vector load_initial(const Context& ctx, const ProblemInstance& inst, Outcome& out) {
    return config_step("w", [&] {
        Vector w = ctx.config.contains("w") ? vector_from_json(ctx.config.at("w"), "w") : Vector::Zero(inst.k());
        if (w.size() != inst.k()) throw Error(ErrorKind::DimensionMismatch, "w must live in R^k");
        out.inputs["w"] = to_json(w);
        return w;
    });
}

Policy load_policy(const Context& ctx, Outcome& out) {
    return config_step("policy", [&] {
        const json j = ctx.config.value("policy", json{{"name", "reflection"}});
        out.inputs["policy"] = j;
        return policy_from_json(j);
    });
}

std::string flag(bool b) { return b ? "true" : "false"; }

std::uint64_t seed_of(const Context& ctx, const char* key, std::uint64_t fallback) {
    if (ctx.seed) return *ctx.seed;
    return ctx.config.value(key, fallback);
}

// Nondecreasing continuous control in the cone U: random nonnegative
// combinations of its extreme rays on random pieces, some of them flat.
CadlagPath random_control(std::mt19937_64& rng, const std::vector<Vector>& rays, double horizon) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int pieces = 1 + static_cast<int>(unit(rng) * 12);
    std::vector<double> times{0.0};
    for (int i = 1; i < pieces; ++i) times.push_back(unit(rng) * horizon);
    times.push_back(horizon);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const Eigen::Index p = rays.front().size();
    Matrix values(p, static_cast<Eigen::Index>(times.size()));
    Vector level = Vector::Zero(p);
    values.col(0) = level;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (unit(rng) > 0.2) {
            for (const auto& r : rays) level += 3.0 * unit(rng) * r;
        }
        values.col(static_cast<Eigen::Index>(i)) = level;
    }
    return CadlagPath::continuous(std::move(times), std::move(values));
}

// Nonnegative piecewise-linear path with jumps, on [0, horizon].
CadlagPath random_integrand(std::mt19937_64& rng, double horizon, bool monotone) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int pieces = 2 + static_cast<int>(unit(rng) * 10);
    std::vector<double> times{0.0};
    for (int i = 1; i < pieces; ++i) times.push_back(unit(rng) * horizon);
    times.push_back(horizon);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix left(1, n), values(1, n);
    double level = unit(rng);
    left(0, 0) = monotone ? 0.0 : level;
    values(0, 0) = level;
    for (Eigen::Index i = 1; i < n; ++i) {
        level = monotone ? level + unit(rng) : unit(rng) * 2.0;
        left(0, i) = level;
        if (unit(rng) < 0.4) level = monotone ? level + unit(rng) : unit(rng) * 2.0;
        values(0, i) = level;
    }
    return CadlagPath(std::move(times), std::move(left), std::move(values));
}

}  // namespace

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string to_csv(const Table& t) {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << "\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return os.str();
}

json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::ConfigNotFound, "cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, p.string() + ": " + e.what());
    }
}

Outcome run_simulate(const Context& ctx) {
    Outcome out;
    const auto inst = load_instance(ctx, out);
    const Vector w = load_initial(ctx, inst, out);
    const SimGrid grid = load_grid(ctx, out);
    const Policy policy = load_policy(ctx, out);
    const auto expect = config_step("expect", [&] { return ctx.config.value("expect", json()); });

    const auto est = monte_carlo_cost(inst, w, policy, grid, ctx.threads);
    out.table.header = {"quantity", "value", "std_error", "paths", "seed", "dt", "horizon", "tail_bound"};
    auto row = [&](const char* name, double v, double se) {
        out.table.rows.push_back({name, fmt(v), fmt(se), std::to_string(est.paths), std::to_string(est.seed),
                                  fmt(grid.dt), fmt(grid.horizon), fmt(est.tail_bound)});
    };
    row("holding", est.holding, est.holding_se);
    row("control", est.control, est.control_se);
    row("total", est.value, est.std_error);
    out.summary = {{"value", est.value},         {"std_error", est.std_error},
                   {"holding", est.holding},     {"holding_se", est.holding_se},
                   {"control", est.control},     {"control_se", est.control_se},
                   {"tail_bound", est.tail_bound}, {"terminal_moment", est.terminal_moment},
                   {"paths", est.paths},         {"seed", est.seed}};
    if (!expect.is_null()) {
        config_step("expect", [&] {
            const std::string q = expect.value("quantity", std::string("total"));
            const double got = q == "holding" ? est.holding : q == "control" ? est.control : est.value;
            const double target = expect.at("value").get<double>();
            const double tol = expect.at("tolerance").get<double>();
            out.pass = std::abs(got - target) <= tol;
            out.summary["expect"] = {{"quantity", q}, {"target", target}, {"tolerance", tol},
                                     {"error", std::abs(got - target)}, {"pass", out.pass}};
            return 0;
        });
    }
    return out;
}

Outcome run_smooth_converge(const Context& ctx) {
    Outcome out;
    const auto inst = load_instance(ctx, out);
    const Vector w = load_initial(ctx, inst, out);
    const auto ks = config_step("ks", [&] {
        const auto v = ctx.config.at("ks").get<std::vector<int>>();
        if (v.empty() || v.front() < 1) throw Error(ErrorKind::InvalidArgument, "ks must be positive");
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (v[i] <= v[i - 1]) throw Error(ErrorKind::InvalidArgument, "ks must be strictly increasing");
        }
        return v;
    });
    out.inputs["ks"] = ks;
    const std::string mode = config_step("mode", [&] { return ctx.config.value("mode", std::string("deterministic")); });

    ConvergenceTable table;
    if (mode == "deterministic") {
        const double horizon = config_step("horizon", [&] { return ctx.config.at("horizon").get<double>(); });
        const CadlagPath b = config_step("brownian", [&] {
            return ctx.config.contains("brownian") ? path_from_json(ctx.config.at("brownian"))
                                                   : CadlagPath::constant(Vector::Zero(inst.k()), horizon);
        });
        const CadlagPath u = config_step("control", [&] {
            const json& c = ctx.config.at("control");
            if (c.contains("step")) {
                return CadlagPath::step(vector_from_json(c.at("step").at("jump"), "jump"),
                                        c.at("step").at("time").get<double>(), horizon);
            }
            return path_from_json(c);
        });
        out.inputs["horizon"] = horizon;
        table = convergence_study(inst, w, b, u, ks);
    } else if (mode == "monte-carlo") {
        const SimGrid grid = load_grid(ctx, out);
        const Policy policy = load_policy(ctx, out);
        table = convergence_study(inst, w, policy, grid, ks, ctx.threads);
    } else {
        throw Error(ErrorKind::ConfigInvalid, "mode must be deterministic or monte-carlo");
    }

    out.table.header = {"k", "cost", "error", "std_error", "diff_std_error", "sup_eta", "c2_empirical", "bound_holds"};
    bool bounds = true;
    for (const auto& r : table.rows) {
        out.table.rows.push_back({std::to_string(r.k), fmt(r.cost), fmt(r.error), fmt(r.std_error),
                                  fmt(r.diff_std_error), fmt(r.sup_eta), fmt(r.c2_empirical), flag(r.bound_holds)});
        bounds = bounds && r.bound_holds;
    }
    out.pass = table.eventually_decreasing() && bounds;
    out.summary = {{"mode", mode},
                   {"base_cost", table.base_cost},
                   {"base_std_error", table.base_std_error},
                   {"final_error", table.rows.back().error},
                   {"eventually_decreasing", table.eventually_decreasing()},
                   {"bounds_hold", bounds}};
    return out;
}

Outcome run_rescale_check(const Context& ctx) {
    Outcome out;
    const auto inst = load_instance(ctx, out);
    const Vector w = load_initial(ctx, inst, out);
    const int controls = config_step("controls", [&] { return ctx.config.value("controls", 1000); });
    const double horizon = config_step("horizon", [&] { return ctx.config.value("horizon", 5.0); });
    const std::uint64_t seed = seed_of(ctx, "seed", 1);
    out.inputs["controls"] = controls;
    out.inputs["horizon"] = horizon;
    out.inputs["seed"] = seed;
    const SimGrid grid = load_grid(ctx, out);

    const auto& sv = inst.structural;
    const auto rays = extreme_rays(inst.u_cone);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double roundtrip = 0.0, lipschitz = 0.0, inverse_lip = 0.0, cov37 = 0.0, cov36 = 0.0;
    for (int trial = 0; trial < controls; ++trial) {
        const CadlagPath u = random_control(rng, rays, horizon);
        const TimeChange tc = stretch(u, sv.u_hat1);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double t = u.time(i);
            roundtrip = std::max(roundtrip, std::abs(tc.inverse.scalar_at(tc.forward.scalar_at(t)) - t));
        }
        for (int probe = 0; probe < 10; ++probe) {
            const double t = unit(rng) * horizon;
            roundtrip = std::max(roundtrip, std::abs(tc.inverse.scalar_at(tc.forward.scalar_at(t)) - t));
        }
        // excess of a0 |U^(t) - U^(s)| over t - s, and of the inverse clock slope over 1
        const CadlagPath uh = rescale_path(u, tc.inverse);
        for (std::size_t i = 1; i < uh.size(); ++i) {
            const double dt = uh.time(i) - uh.time(i - 1);
            lipschitz = std::max(lipschitz, sv.a0 * (uh.value(i) - uh.value(i - 1)).norm() - dt);
        }
        for (std::size_t i = 1; i < tc.inverse.size(); ++i) {
            const double dt = tc.inverse.time(i) - tc.inverse.time(i - 1);
            inverse_lip = std::max(inverse_lip, tc.inverse.value(i)(0) - tc.inverse.value(i - 1)(0) - dt);
        }
        const CadlagPath f = random_integrand(rng, horizon, false);
        cov37 = std::max(cov37, cov_identity_check(f, tc.forward).gap);
        const CadlagPath big_f = random_integrand(rng, tc.forward.scalar_at(horizon), true);
        cov36 = std::max(cov36, cov_identity_check(f, tc.forward, big_f).gap);
    }

    double rescaled = 0.0;
    const Policy policy = make_reflection_policy();
    for (std::int64_t i = 0; i < grid.paths; ++i) {
        const auto b = sample_brownian(inst, grid, static_cast<std::uint64_t>(i));
        const auto pol = policy.apply(inst, w, b);
        rescaled = std::max(rescaled, rescaled_cost(inst, pol.u, pol.w, grid.horizon).gap_vs_direct);
    }

    out.table.header = {"check", "trials", "max_value", "tolerance", "pass"};
    struct Check {
        const char* name;
        long trials;
        double value;
        double tol;
    };
    const std::vector<Check> checks = {{"inverse_roundtrip", controls, roundtrip, 1e-9},
                                       {"rescaled_control_lipschitz_excess", controls, lipschitz, 1e-12},
                                       {"inverse_clock_lipschitz_excess", controls, inverse_lip, 1e-12},
                                       {"change_of_variables_identity_clock", controls, cov37, 1e-9},
                                       {"change_of_variables_general", controls, cov36, 1e-9},
                                       {"rescaled_cost_gap", static_cast<long>(grid.paths), rescaled, 1e-6}};
    for (const auto& c : checks) {
        const bool ok = c.value <= c.tol;
        out.pass = out.pass && ok;
        out.table.rows.push_back({c.name, std::to_string(c.trials), fmt(c.value), fmt(c.tol), flag(ok)});
        out.summary[c.name] = {{"max", c.value}, {"tolerance", c.tol}, {"pass", ok}};
    }
    return out;
}

Outcome run_reduce(const Context& ctx) {
    Outcome out;
    const BCPInstance bcp = config_step("bcp", [&] {
        auto b = bcp_from_json(resolve(ctx, ctx.config.at("bcp"), "bcp"));
        out.inputs["bcp"] = to_json(b);
        return b;
    });
    const ReductionOptions opt = config_step("reduction", [&] {
        ReductionOptions o;
        if (ctx.config.contains("M")) o.m = matrix_from_json(ctx.config.at("M"), "M");
        o.allow_rational = ctx.config.value("rational", true);
        o.repair_nonnegative = ctx.config.value("repair", true);
        return o;
    });

    const WorkloadData wd = workload_reduction(bcp.r, bcp.k, opt);
    const EwfReport rep = validate_ewf_assumptions(wd);
    const InducedCost ic = induced_cost(bcp, wd);
    const double residual_tol = wd.rational ? 0.0 : 1e-10 * std::max(1.0, wd.m.norm() * bcp.r.norm());
    const bool residual_ok = wd.residual <= residual_tol;

    json report = to_json(wd);
    report["assumptions"] = {{"pass", rep.pass}, {"failures", rep.failures}};
    report["induced_cost"] = {{"m", to_json(ic.m)}, {"residual", ic.residual}, {"fiber_constant", ic.fiber_constant}};
    report["continuous_selection_asserted"] = bcp.continuous_selection;
    out.files.emplace_back("reduce.json", report.dump(2) + "\n");
    std::string text = describe(wd, rep);
    text += std::string("holding cost ") + (ic.fiber_constant ? "factors through M" : "is NOT constant on workload fibers") + "\n";
    out.files.emplace_back("reduce.txt", text);

    out.table.header = {"path", "j_bcp", "j_ewf", "gap"};
    double worst_gap = 0.0;
    std::int64_t evaluated = 0;
    if (ctx.config.contains("grid")) {
        const SimGrid grid = load_grid(ctx, out);
        for (std::int64_t i = 0; i < grid.paths; ++i) {
            const auto b = sample_brownian(bcp.b, bcp.sigma_factor, grid, static_cast<std::uint64_t>(i));
            const auto y = regulator_control(bcp, b);
            const auto eq = bcp_cost_and_equivalence(bcp, wd, y, b, grid.horizon);
            out.table.rows.push_back({std::to_string(i), fmt(eq.j_bcp), eq.j_ewf ? fmt(*eq.j_ewf) : "",
                                      eq.gap ? fmt(*eq.gap) : ""});
            if (eq.gap) worst_gap = std::max(worst_gap, *eq.gap);
            ++evaluated;
        }
    }
    const bool gap_ok = !ic.fiber_constant || worst_gap <= 1e-6;
    out.pass = rep.pass && residual_ok && gap_ok;
    out.summary = {{"k", wd.k},
                   {"rational", wd.rational},
                   {"residual", wd.residual},
                   {"residual_ok", residual_ok},
                   {"assumptions_pass", rep.pass},
                   {"failures", rep.failures},
                   {"fiber_constant", ic.fiber_constant},
                   {"paths", evaluated},
                   {"max_gap", ic.fiber_constant ? json(worst_gap) : json()},
                   {"provenance", wd.provenance}};
    if (!ic.fiber_constant) out.summary["flag"] = "holding cost not constant on workload fibers; no equivalence asserted";
    return out;
}

Outcome run_diagnose(const Context& ctx) {
    Outcome out;
    const auto inst = load_instance(ctx, out);
    const Vector w = load_initial(ctx, inst, out);
    const SimGrid grid = load_grid(ctx, out);
    const Policy policy = load_policy(ctx, out);
    const double r = config_step("r", [&] { return ctx.config.value("r", 2.0); });
    const auto checkpoints =
        config_step("checkpoints", [&] { return ctx.config.value("checkpoints", std::vector<double>{}); });
    out.inputs["r"] = r;

    const auto table = moment_decay_check(inst, w, policy, grid, r, checkpoints, ctx.threads);
    out.table.header = {"t", "discounted_moment", "std_error"};
    for (const auto& row : table.rows) out.table.rows.push_back({fmt(row.t), fmt(row.value), fmt(row.std_error)});

    const auto& cert = inst.cost.certificate();
    const auto assumption = check_assumption_2_2(inst.u_cone, inst.g, inst.h, cert.alpha);
    const auto growth = validate_growth(inst.cost, inst.w_cone, grid.seed);
    out.pass = table.decreasing && assumption.satisfied && growth.pass;
    out.summary = {{"decreasing", table.decreasing},
                   {"final_value", table.rows.empty() ? 0.0 : table.rows.back().value},
                   {"assumption",
                    {{"satisfied", assumption.satisfied},
                     {"a1", assumption.a1 ? json(*assumption.a1) : json()},
                     {"c_g", assumption.c_g ? json(*assumption.c_g) : json()}}},
                   {"growth",
                    {{"pass", growth.pass},
                     {"worst_lower_slack", growth.worst_lower_slack},
                     {"worst_upper_slack", growth.worst_upper_slack},
                     {"samples", growth.samples}}},
                   {"cost", inst.cost.describe()}};
    if (!table.decreasing) out.summary["flag"] = "discounted moments do not decrease";
    return out;
}

std::string Report::render() const {
    std::ostringstream os;
    os << "# Experiment summary\n";
    for (const auto& s : sections) os << "\n" << s.text;
    if (!warnings.empty()) {
        os << "\n## Warnings\n\n";
        for (const auto& w : warnings) os << "- " << w << "\n";
    }
    return os.str();
}

namespace {

std::string render_value(const json& v) {
    if (v.is_number_float()) return fmt(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

// CSV rendered as a markdown table, capped at `limit` rows.
std::string csv_as_markdown(const fs::path& p, std::size_t limit) {
    std::ifstream in(p);
    if (!in) return "";
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) return "";
    std::ostringstream os;
    auto row = [&](const std::string& l) {
        os << "|";
        std::size_t start = 0;
        for (std::size_t end = l.find(','); ; end = l.find(',', start)) {
            os << " " << l.substr(start, end == std::string::npos ? end : end - start) << " |";
            if (end == std::string::npos) break;
            start = end + 1;
        }
        os << "\n";
    };
    row(lines[0]);
    const auto cols = static_cast<std::size_t>(std::count(lines[0].begin(), lines[0].end(), ',')) + 1;
    os << "|";
    for (std::size_t i = 0; i < cols; ++i) os << "---|";
    os << "\n";
    for (std::size_t i = 1; i < lines.size() && i <= limit; ++i) row(lines[i]);
    if (lines.size() - 1 > limit) os << "\n(" << lines.size() - 1 - limit << " more rows)\n";
    return os.str();
}

}  // namespace

Report build_report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::ConfigNotFound, "no results directory " + dir.string());
    std::vector<fs::path> manifests;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 14 && name.ends_with(".manifest.json")) {
            manifests.push_back(entry.path());
        }
    }
    std::sort(manifests.begin(), manifests.end());

    Report rep;
    for (const auto& p : manifests) {
        const std::string file = p.filename().string();
        json m;
        try {
            std::ifstream in(p);
            m = json::parse(in);
            if (!m.is_object() || !m.contains("kind") || !m.contains("summary") || !m.at("summary").is_object()) {
                rep.warnings.push_back(file + ": manifest is missing kind or summary");
                continue;
            }
        } catch (const json::exception& e) {
            rep.warnings.push_back(file + ": unreadable manifest (" + e.what() + ")");
            continue;
        }
        ReportSection s;
        s.file = file;
        s.kind = m.at("kind").get<std::string>();
        std::ostringstream os;
        os << "## " << s.kind << " (" << file << ")\n\n";
        os << "status: " << m.value("status", std::string("unknown")) << "\n";
        if (m.contains("wall_time_seconds")) os << "wall time: " << render_value(m.at("wall_time_seconds")) << " s\n";
        os << "\n";
        for (const auto& [key, value] : m.at("summary").items()) os << "- " << key << ": " << render_value(value) << "\n";
        const fs::path csv = dir / (s.kind + ".csv");
        const std::string table = csv_as_markdown(csv, 30);
        if (!table.empty()) os << "\n" << table;
        s.text = os.str();
        rep.sections.push_back(std::move(s));
    }
    return rep;
}

}  // namespace scc::cli
