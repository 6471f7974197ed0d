// Command-line front end: space generation, nonlocal energies, covering
// algorithms, inequality reports, and theta sweeps, with JSON/CSV output.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracper/fracper.hpp"

namespace {

using nlohmann::json;
using namespace fracper;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

// Set predicates: "halfspace:AXIS:THRESH", "ball:CENTER:RADIUS",
// "indices:i,j,k", "all".
point_set parse_set(const mm_space& S, const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.empty()) throw std::invalid_argument("empty set spec");
    if (parts[0] == "all") return S.full_set();
    if (parts[0] == "halfspace") {
        if (parts.size() != 3) throw std::invalid_argument("halfspace spec is halfspace:AXIS:T");
        if (!S.has_coords())
            throw std::invalid_argument("halfspace predicates need a space with coordinates");
        const std::size_t axis = std::stoul(parts[1]);
        const double t = std::stod(parts[2]);
        if (axis >= S.coords()[0].size()) throw std::invalid_argument("axis out of range");
        return S.make_set_if([&](std::uint32_t i) { return S.coords()[i][axis] <= t; });
    }
    if (parts[0] == "ball") {
        if (parts.size() != 3) throw std::invalid_argument("ball spec is ball:CENTER:RADIUS");
        return S.ball(static_cast<std::uint32_t>(std::stoul(parts[1])), std::stod(parts[2]));
    }
    if (parts[0] == "indices") {
        if (parts.size() != 2) throw std::invalid_argument("indices spec is indices:i,j,k");
        std::vector<std::uint32_t> idx;
        for (const auto& tok : split(parts[1], ','))
            if (!tok.empty()) idx.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        return S.make_set(std::move(idx));
    }
    throw std::invalid_argument("unknown set spec: " + spec);
}

// Function specs: "dist:INDEX", "coord:AXIS", "file:PATH" (JSON array).
std::vector<double> parse_function(const mm_space& S, const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.empty()) throw std::invalid_argument("empty function spec");
    if (parts[0] == "dist") {
        std::vector<double> u(S.n());
        S.copy_distance_row(static_cast<std::uint32_t>(std::stoul(parts.at(1))), u.data());
        return u;
    }
    if (parts[0] == "coord") {
        if (!S.has_coords())
            throw std::invalid_argument("coord functions need a space with coordinates");
        const std::size_t axis = std::stoul(parts.at(1));
        std::vector<double> u(S.n());
        for (std::size_t i = 0; i < S.n(); ++i) u[i] = S.coords()[i][axis];
        return u;
    }
    if (parts[0] == "file") {
        std::ifstream in(parts.at(1));
        if (!in) throw std::runtime_error("cannot open function file: " + parts[1]);
        json j;
        in >> j;
        return j.get<std::vector<double>>();
    }
    throw std::invalid_argument("unknown function spec: " + spec);
}

void write_output(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::cout << payload;
        if (!payload.empty() && payload.back() != '\n') std::cout << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open output file: " + out_path);
        out << payload;
        if (!payload.empty() && payload.back() != '\n') out << "\n";
    }
}

json cover_to_json(const ball_cover& c) {
    json j;
    j["schema_version"] = schema_version;
    j["algorithm"] = c.algorithm;
    j["tau"] = c.tau;
    j["inflation"] = c.inflation;
    json balls = json::array();
    for (const auto& b : c.balls)
        balls.push_back({{"center", b.center}, {"radius", b.radius}, {"floor", b.floor_flagged}});
    j["balls"] = std::move(balls);
    json cert;
    cert["disjoint"] = c.certificate.disjoint;
    cert["covers_target"] = c.certificate.covers_target;
    cert["density_band_ok"] = c.certificate.density_band_ok;
    cert["dyadic_ok"] = c.certificate.dyadic_ok;
    cert["density_lo"] = c.certificate.density_lo;
    cert["density_hi"] = c.certificate.density_hi;
    cert["band_lo"] = c.band_lo;
    cert["band_hi"] = c.band_hi;
    if (!std::isnan(c.certificate.ratio_sum)) cert["ratio_sum"] = c.certificate.ratio_sum;
    if (!std::isnan(c.certificate.quotient)) cert["quotient"] = c.certificate.quotient;
    if (!std::isnan(c.certificate.mass_bound_constant))
        cert["mass_bound_constant"] = c.certificate.mass_bound_constant;
    cert["floor_flags"] = c.certificate.floor_flags;
    cert["threshold_clamped"] = c.certificate.threshold_clamped;
    if (!c.certificate.note.empty()) cert["note"] = c.certificate.note;
    cert["pass"] = c.certificate.pass();
    j["certificate"] = std::move(cert);
    return j;
}

json report_to_json(const ineq_report& r) {
    json j;
    j["schema_version"] = schema_version;
    j["kind"] = r.kind;
    j["theta"] = r.theta;
    j["q"] = r.q;
    j["tau"] = r.tau;
    j["lhs"] = r.lhs;
    j["rhs_raw"] = r.rhs_raw;
    j["scaling"] = r.scaling;
    j["ratio"] = std::isfinite(r.ratio) ? json(r.ratio) : json("inf");
    j["witness"] = r.witness;
    if (!r.flags.empty()) j["flags"] = r.flags;
    if (r.has_pass) {
        j["pass"] = r.pass;
        j["slack"] = r.slack;
    }
    return j;
}

std::vector<double> parse_theta_grid(const std::string& spec) {
    // "a:b:k" -> k evenly spaced values from a to b inclusive; or "a,b,c"
    if (spec.find(':') != std::string::npos) {
        const auto parts = split(spec, ':');
        if (parts.size() != 3) throw std::invalid_argument("theta grid is a:b:count");
        const double a = std::stod(parts[0]);
        const double b = std::stod(parts[1]);
        const int k = std::stoi(parts[2]);
        if (k < 1) throw std::invalid_argument("theta grid needs at least one value");
        std::vector<double> out;
        for (int i = 0; i < k; ++i)
            out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
        return out;
    }
    std::vector<double> out;
    for (const auto& tok : split(spec, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

std::string format_csv(const theta_sweep& sw) {
    std::string s = "# schema_version: 1\n";
    s += "theta,kind,max_ratio,median_ratio,witness_id\n";
    char buf[512];
    for (const auto& row : sw.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%s\n", row.theta, sw.kind.c_str(),
                      row.max_ratio, row.median_ratio, row.argmax_witness.c_str());
        s += buf;
    }
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional-perimeter laboratory on finite metric measure spaces"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: all cores)");

    std::string out_path;

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "generate a benchmark space");
    gen->require_subcommand(1);
    int g_dim = 1, g_n = 0, g_wing = 0, g_origin = 0;
    double g_eps = 0.5, g_alpha = 0.0;
    std::string g_base;
    auto* gen_grid = gen->add_subcommand("grid", "lattice on [0,1]^dim");
    gen_grid->add_option("--dim", g_dim)->required();
    gen_grid->add_option("--n", g_n, "points per side")->required();
    gen_grid->add_option("--out", out_path);
    auto* gen_bow = gen->add_subcommand("bowtie", "two path wings glued at a vertex");
    gen_bow->add_option("--wing-n", g_wing)->required();
    gen_bow->add_option("--out", out_path);
    auto* gen_snow = gen->add_subcommand("snowflake", "metric snowflake d^eps");
    gen_snow->add_option("--space", g_base)->required();
    gen_snow->add_option("--eps", g_eps)->required();
    gen_snow->add_option("--out", out_path);
    auto* gen_wei = gen->add_subcommand("weighted", "distance-power weights");
    gen_wei->add_option("--space", g_base)->required();
    gen_wei->add_option("--alpha", g_alpha)->required();
    gen_wei->add_option("--origin", g_origin);
    gen_wei->add_option("--out", out_path);

    // --- compute ---
    auto* comp = app.add_subcommand("compute", "evaluate a nonlocal functional");
    std::string c_quantity, c_space, c_set = "all", c_omega = "all", c_kernel = "symmetric",
                c_u;
    double c_theta = 0.5, c_q = 1.0;
    comp->add_option("quantity", c_quantity,
                     "perimeter | energy | coarea | graph-perimeter | deviation")
        ->required();
    comp->add_option("--space", c_space)->required();
    comp->add_option("--set", c_set, "set predicate");
    comp->add_option("--omega", c_omega, "domain predicate");
    comp->add_option("--theta", c_theta);
    comp->add_option("--kernel", c_kernel, "asymmetric | symmetric");
    comp->add_option("--q", c_q);
    comp->add_option("--u", c_u, "function spec (dist:I | coord:A | file:P)");
    comp->add_option("--out", out_path);

    // --- cover ---
    auto* cov = app.add_subcommand("cover", "run a covering algorithm");
    std::string v_space, v_alg, v_set, v_emit;
    double v_r0 = 0.0, v_lambda = 0.5, v_kappa = 0.5, v_theta = 0.5, v_tau = 1.0,
           v_radius = 0.0;
    int v_center = 0, v_k = -1;
    cov->add_option("--space", v_space)->required();
    cov->add_option("--algorithm", v_alg, "five_r | cz | boundary | boxing | local_boxing")
        ->required();
    cov->add_option("--set", v_set, "target set predicate");
    cov->add_option("--center", v_center);
    cov->add_option("--r0", v_r0);
    cov->add_option("--lambda", v_lambda);
    cov->add_option("--kappa", v_kappa);
    cov->add_option("--theta", v_theta);
    cov->add_option("--tau", v_tau);
    cov->add_option("--k", v_k, "scale index (boundary; defaults to the computed K)");
    cov->add_option("--radius", v_radius, "candidate radius (five_r)");
    cov->add_option("--emit", v_emit, "output path for cover.json");

    // --- verify ---
    auto* ver = app.add_subcommand("verify", "evaluate one inequality report");
    std::string r_space, r_kind, r_set, r_u;
    double r_theta = 0.5, r_q = 0.0, r_tau = 1.0, r_radius = 0.0;
    int r_center = 0;
    ver->add_option("--space", r_space)->required();
    ver->add_option("--kind", r_kind)->required();
    ver->add_option("--theta", r_theta);
    ver->add_option("--q", r_q, "0 selects the default Q/(Q-theta)");
    ver->add_option("--tau", r_tau);
    ver->add_option("--set", r_set);
    ver->add_option("--u", r_u);
    ver->add_option("--center", r_center);
    ver->add_option("--radius", r_radius);
    ver->add_option("--out", out_path);

    // --- sweep ---
    auto* sw = app.add_subcommand("sweep", "theta sweep over a witness family");
    std::string s_space, s_kind = "bbm_poincare", s_thetas = "0.1:0.9:9";
    std::uint64_t s_seed = 42;
    bool s_norescale = false;
    int s_levels = 8;
    sw->add_option("--space", s_space)->required();
    sw->add_option("--kind", s_kind);
    sw->add_option("--thetas", s_thetas, "a:b:count or comma list");
    sw->add_option("--seed", s_seed);
    sw->add_option("--levels", s_levels, "dyadic ball radius levels");
    sw->add_flag("--no-rescale", s_norescale, "drop the (1-theta) / theta(1-theta) prefactor");
    sw->add_option("--out", out_path);

    // --- constants ---
    auto* cons = app.add_subcommand("constants", "structural constant estimates");
    std::string k_space;
    double k_Q = 0.0;
    cons->add_option("--space", k_space)->required();
    cons->add_option("--Q", k_Q, "lower Ahlfors exponent (default: fitted Q_d)");
    cons->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (threads > 0) set_thread_count(threads);

        if (gen->parsed()) {
            mm_space s = [&] {
                if (gen_grid->parsed()) return grid(g_dim, g_n);
                if (gen_bow->parsed()) return bowtie(g_wing);
                if (gen_snow->parsed()) return snowflake(load_space(g_base), g_eps);
                return weighted_space(load_space(g_base), g_alpha,
                                      static_cast<std::uint32_t>(g_origin));
            }();
            write_output(out_path, space_to_json(s).dump(2));
            return 0;
        }

        if (comp->parsed()) {
            const mm_space S = load_space(c_space);
            const point_set Om = parse_set(S, c_omega);
            const auto t0 = std::chrono::steady_clock::now();
            json j;
            j["schema_version"] = schema_version;
            j["op"] = c_quantity;
            if (c_quantity == "perimeter") {
                const energy_value e = fractional_perimeter(S, parse_set(S, c_set), Om, c_theta);
                j["value"] = e.value;
                j["theta"] = e.theta;
                j["pair_count"] = e.pair_count;
                j["domain_size"] = e.domain_size;
            } else if (c_quantity == "energy") {
                const auto u = parse_function(S, c_u);
                const kernel_kind kk = (c_kernel == "asymmetric" || c_kernel == "asym")
                                           ? kernel_kind::asymmetric
                                           : kernel_kind::symmetric;
                const energy_value e = fractional_energy(S, u, Om, c_theta, kk);
                j["value"] = e.value;
                j["theta"] = e.theta;
                j["pair_count"] = e.pair_count;
                j["domain_size"] = e.domain_size;
            } else if (c_quantity == "coarea") {
                const auto u = parse_function(S, c_u);
                const energy_value e = coarea_rhs(S, u, Om, c_theta);
                j["value"] = e.value;
                j["theta"] = e.theta;
                j["pair_count"] = e.pair_count;
                j["domain_size"] = e.domain_size;
            } else if (c_quantity == "graph-perimeter") {
                j["value"] = graph_perimeter(S, parse_set(S, c_set), Om);
            } else if (c_quantity == "deviation") {
                const auto u = parse_function(S, c_u);
                const auto [mean, dev] = mean_and_deviation(S, u, parse_set(S, c_set), c_q);
                j["mean"] = mean;
                j["value"] = dev;
                j["q"] = c_q;
            } else {
                throw std::invalid_argument("unknown quantity: " + c_quantity);
            }
            const auto t1 = std::chrono::steady_clock::now();
            j["wall_time_ms"] =
                std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() / 1000.0;
            write_output(out_path, j.dump(2));
            return 0;
        }

        if (cov->parsed()) {
            const mm_space S = load_space(v_space);
            ball_cover c;
            if (v_alg == "five_r") {
                if (!(v_radius > 0.0))
                    throw std::invalid_argument("five_r needs --radius for the candidate balls");
                const point_set base = v_set.empty() ? S.full_set() : parse_set(S, v_set);
                std::vector<std::pair<std::uint32_t, double>> cands;
                for (std::uint32_t i : base.members()) cands.push_back({i, v_radius});
                c = five_r_cover(S, cands);
            } else if (v_alg == "cz") {
                c = cz_decomposition(S, static_cast<std::uint32_t>(v_center), v_r0,
                                     parse_set(S, v_set), v_lambda);
            } else if (v_alg == "boundary") {
                const int k = v_k >= 0 ? v_k : boundary_scale_K(S, v_lambda);
                c = boundary_balls(S, static_cast<std::uint32_t>(v_center), v_r0,
                                   parse_set(S, v_set), v_lambda, k);
            } else if (v_alg == "boxing") {
                c = boxing_cover(S, parse_set(S, v_set), v_theta, v_tau);
            } else if (v_alg == "local_boxing") {
                c = local_boxing_cover(S, static_cast<std::uint32_t>(v_center), v_r0,
                                       parse_set(S, v_set), v_kappa, v_theta);
            } else {
                throw std::invalid_argument("unknown algorithm: " + v_alg);
            }
            write_output(v_emit.empty() ? out_path : v_emit, cover_to_json(c).dump(2));
            return 0;
        }

        if (ver->parsed()) {
            const mm_space S = load_space(r_space);
            if (r_kind == "boxing") {
                const auto rep = boxing_report(S, parse_set(S, r_set), r_theta, r_tau);
                write_output(out_path, report_to_json(rep).dump(2));
                return 0;
            }
            const auto kind = ineq_kind_from(r_kind);
            if (!kind) throw std::invalid_argument("unknown kind: " + r_kind);
            std::optional<ball_spec> b;
            if (kind_takes_ball(*kind))
                b = ball_spec{static_cast<std::uint32_t>(r_center), r_radius};
            ineq_report rep;
            if (kind_takes_function(*kind))
                rep = report(S, *kind, parse_function(S, r_u), b, r_theta, r_q, r_tau, r_u);
            else
                rep = report(S, *kind, parse_set(S, r_set), b, r_theta, r_q, r_tau, r_set);
            write_output(out_path, report_to_json(rep).dump(2));
            return 0;
        }

        if (sw->parsed()) {
            const mm_space S = load_space(s_space);
            const auto kind = ineq_kind_from(s_kind);
            if (!kind) throw std::invalid_argument("unknown kind: " + s_kind);
            family_spec fs;
            fs.seed = s_seed;
            fs.max_radius_levels = s_levels;
            const theta_sweep res = sweep(S, *kind, parse_theta_grid(s_thetas), fs, !s_norescale);
            write_output(out_path, format_csv(res));
            return 0;
        }

        if (cons->parsed()) {
            const mm_space S = load_space(k_space);
            const structural_constants sc =
                k_Q > 0.0 ? S.estimate_constants(k_Q) : S.estimate_constants();
            json j;
            j["schema_version"] = schema_version;
            j["c_mu"] = sc.c_mu;
            j["q_d"] = sc.q_d;
            j["c_lower"] = sc.c_lower;
            j["q_d_doubling"] = sc.q_d_doubling;
            j["c_lower_doubling"] = sc.c_lower_doubling;
            j["s"] = sc.s;
            j["c_s"] = sc.c_s;
            j["c0"] = sc.c0;
            j["q_ahlfors"] = sc.q_ahlfors;
            if (sc.has_annular_decay) {
                j["c_a"] = sc.c_a;
                j["beta"] = sc.beta;
            }
            write_output(out_path, j.dump(2));
            return 0;
        }
    } catch (const precondition_error& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
