// Batch front end: run the named examples, evaluate transfinite sums and
// products from JSON family specs, and emit convergence and diagnostic
// tables. Exit codes: 0 success, 1 input error, 2 a computation ran but the
// verdict was negative (not converged, growth witness, divergence).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <prodint/catalog.hpp>
#include <prodint/gode.hpp>
#include <prodint/json_io.hpp>
#include <prodint/prodint.hpp>
#include <prodint/stieltjes.hpp>
#include <prodint/transport.hpp>

using namespace prodint;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitVerdictNegative = 2;

struct OutputOptions {
    std::string path;
    std::string format = "json";
    bool noTimestamp = false;
};

void addOutputFlags(CLI::App* cmd, OutputOptions& out) {
    cmd->add_option("-o,--out", out.path, "output file (stdout when omitted)");
    cmd->add_option("--format", out.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_flag("--no-timestamp", out.noTimestamp, "omit the timestamp field");
}

void emit(const json& payload, const OutputOptions& opt) {
    json j = payload;
    if (!opt.noTimestamp) {
        const auto now = std::chrono::system_clock::now();
        j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    }
    std::string text;
    if (opt.format == "csv" && j.contains("levels")) {
        std::ostringstream os;
        os << "level,m,delta,value_json\n";
        int level = 0;
        for (const auto& row : j.at("levels")) {
            os << level++ << "," << row.at("m").get<std::uint64_t>() << ","
               << row.at("delta").get<double>() << ",\"" << row.at("value").dump() << "\"\n";
        }
        text = os.str();
    } else {
        text = j.dump(2) + "\n";
    }
    if (opt.path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(opt.path, std::ios::binary);
        f << text;
    }
}

json reportJson(const ConvergenceReport& rep) {
    json rows = json::array();
    for (const auto& row : rep.levels)
        rows.push_back({{"m", row.m}, {"delta", row.delta}, {"value", toJson(row.value)}});
    json j;
    j["levels"] = rows;
    j["converged"] = rep.converged;
    j["tol"] = rep.tol;
    if (auto e = rep.extrapolated()) j["extrapolated"] = toJson(*e);
    return j;
}

json boundednessJson(const BoundednessVerdict& v) {
    json j;
    j["verdict"] = v.bounded ? "bounded" : "unbounded-witness";
    j["max_seen"] = v.maxSeen;
    if (!v.witness.empty()) j["witness"] = v.witness;
    return j;
}

std::uint64_t envBudget(std::uint64_t fallback) {
    if (const char* s = std::getenv("PRODINT_BUDGET")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
    }
    return fallback;
}

json loadSpec(const std::string& pathOrName) {
    std::ifstream f(pathOrName);
    if (!f.good()) throw std::invalid_argument("cannot open " + pathOrName);
    json j;
    f >> j;
    return j;
}

/// catalog name -> generator wrapper, or a JSON file path
json mappingSpec(const std::string& arg) {
    for (const auto& e : catalogEntries())
        if (e.name == arg) return json{{"generator", {{"name", arg}}}};
    return loadSpec(arg);
}

int runExample(const std::string& name, double tol, std::uint64_t budget, int levels,
               const OutputOptions& opt) {
    json j;
    j["example"] = name;
    if (name == "ex201") {
        const Family fam = ex201Family();
        j["sum"] = toJson(transfiniteSum(fam, tol, budget));
        auto pair = checkExpSumIdentity(fam, tol, budget);
        j["exp_product"] = toJson(pair.first);
        j["exp_of_sum"] = toJson(pair.second);
        j["abs_summable"] = toJson(absSummable(fam, std::max(tol, 1e-6), budget));
    } else if (name == "ex301" || name == "ex302") {
        const StepMapping A = name == "ex301" ? ex301() : ex302();
        j["product_integral"] = toJson(stepProductIntegral(A, tol, budget));
        j["riemann"] = boundednessJson(riemannCriterion(A));
        j["bochner"] = toJson(bochnerCriterion(A, std::max(tol, 1e-7), budget));
    } else if (name == "ex32") {
        j["ks_product"] = toJson(ksStepProduct(ex32(), tol, budget));
    } else if (name == "ex33") {
        const StepMapping A = ex33();
        j["ks_product"] = toJson(ksStepProduct(A, tol, budget));
        const ScalarRsReport rs = scalarRsConditions(A, 1e-3);
        j["scalar_conditions"] = {{"jumps_nonvanishing", rs.jumpsNonvanishing},
                                  {"jump_square_series", verdictName(rs.jumpSquareSeries)},
                                  {"partition_exhibited", rs.partitionExhibited}};
    } else if (name == "ex401") {
        const RegulatedSample A = ex401(60);
        j["riemann_refinement"] = reportJson(riemannProductIntegral(EvalMapping::of(A), std::max(tol, 1e-4), levels));
    } else if (name == "sqrtcos") {
        auto F = [](double t) { return t == 0.0 ? 0.0 : std::sqrt(t) * std::cos(M_PI / t); };
        auto f = [](double t) {
            if (t == 0.0) return 0.0;
            return std::cos(M_PI / t) / (2.0 * std::sqrt(t)) + M_PI * std::sin(M_PI / t) / std::pow(t, 1.5);
        };
        const SubstitutionResult r = substitutionCheck(f, F, 0.0, 1.0, std::max(tol, 1e-7));
        j["stieltjes_route"] = toJson(r.stieltjesRoute);
        j["exponential_route"] = toJson(r.exponentialRoute);
        j["refinement_validation"] = r.refinementValidation;
    } else if (name == "ex711") {
        const ProjectionPath P = ex711Path(std::max(20, levels + 4));
        j["haahti"] = toJson(transportLimit(haahtiRefinement(P, tol, levels)));
        const Ex711Witness w = ex711DivergenceWitness(std::max(20, levels + 4));
        j["ks"] = {{"verdict", "divergence-witness"}, {"partition_gap", w.distance}};
    } else if (name == "linear" || name == "constant") {
        const RegulatedSample A =
            name == "linear" ? linearMapping() : constantMapping(Element::scalar(1.0));
        j["riemann_refinement"] = reportJson(riemannProductIntegral(EvalMapping::of(A), tol, levels));
    } else {
        throw UnknownName(name);
    }
    emit(j, opt);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"product integrals and transfinite series over well-ordered index sets"};
    app.require_subcommand(1);

    double tol = 1e-8;
    int levels = 16;
    std::uint64_t budget = envBudget(kDefaultBudget);
    app.add_option("--tol", tol, "tolerance")->check(CLI::PositiveNumber);
    app.add_option("--levels", levels, "refinement levels")->check(CLI::Range(1, 30));
    app.add_option("--budget", budget, "generator evaluation budget");

    OutputOptions out;

    // examples: list the catalog or run one entry end to end
    auto* examples = app.add_subcommand("examples", "run or list the named examples");
    examples->require_subcommand(1);
    auto* list = examples->add_subcommand("list", "print the catalog");
    std::string filter;
    list->add_option("filter", filter, "substring filter");
    std::string exampleName;
    auto* run = examples->add_subcommand("run", "run one example");
    run->add_option("name", exampleName, "example name")->required();
    addOutputFlags(run, out);

    // sum / prod over JSON family specs
    std::string inputPath;
    auto* sum = app.add_subcommand("sum", "transfinite sum of a family");
    sum->add_option("--input", inputPath, "family JSON")->required();
    addOutputFlags(sum, out);
    auto* prod = app.add_subcommand("prod", "transfinite product of a family");
    prod->add_option("--input", inputPath, "family JSON")->required();
    addOutputFlags(prod, out);

    // product integrals of step mappings
    std::string mappingArg, piMode = "step";
    auto* pi = app.add_subcommand("prodint", "product integral of a mapping");
    pi->add_option("--mapping", mappingArg, "catalog name or JSON file")->required();
    pi->add_option("--mode", piMode, "step | riemann | commutative | criteria")
        ->check(CLI::IsMember({"step", "riemann", "commutative", "criteria"}));
    addOutputFlags(pi, out);

    // Stieltjes product integrals
    std::string stMode = "ks";
    double pExp = 2.0;
    auto* st = app.add_subcommand("stieltjes", "Stieltjes product integral of a mapping");
    st->add_option("--mapping", mappingArg, "catalog name or JSON file")->required();
    st->add_option("--mode", stMode, "ks | rs | pvar | scalar | subst | idem")
        ->check(CLI::IsMember({"ks", "rs", "pvar", "scalar", "subst", "idem"}));
    st->add_option("--p", pExp, "p-variation exponent")->check(CLI::PositiveNumber);
    addOutputFlags(st, out);

    // parallel translation
    std::string surfaceName = "sphere", pathName = "latitude:0.7853981633974483";
    auto* tr = app.add_subcommand("transport", "parallel translation along a path");
    tr->add_option("--surface", surfaceName, "sphere | cylinder")
        ->check(CLI::IsMember({"sphere", "cylinder"}));
    tr->add_option("--path", pathName, "latitude:<polar angle> | helix:<pitch> | cube-corner");
    addOutputFlags(tr, out);

    // generalized differential equations
    std::string godeForm = "vdef";
    auto* gd = app.add_subcommand("gode", "linear generalized ODE correspondence");
    gd->add_option("--mapping", mappingArg, "catalog name or JSON file")->required();
    gd->add_option("--form", godeForm, "linear | stieltjes | vdef")
        ->check(CLI::IsMember({"linear", "stieltjes", "vdef"}));
    addOutputFlags(gd, out);

    for (CLI::App* sub : {examples, list, run, sum, prod, pi, st, tr, gd}) sub->fallthrough();
    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& e : catalogEntries()) {
                if (!filter.empty() && e.name.find(filter) == std::string::npos &&
                    e.summary.find(filter) == std::string::npos)
                    continue;
                std::printf("%-10s %-60s %s\n", e.name.c_str(), e.summary.c_str(),
                            e.closedForm.c_str());
            }
            return kExitOk;
        }
        if (run->parsed()) return runExample(exampleName, tol, budget, levels, out);

        if (sum->parsed() || prod->parsed()) {
            const Family fam = familyFromJson(loadSpec(inputPath));
            const TransfiniteResult r =
                sum->parsed() ? transfiniteSum(fam, tol, budget) : transfiniteProduct(fam, tol, budget);
            emit(toJson(r), out);
            return r.truncated || r.diverged() ? kExitVerdictNegative : kExitOk;
        }

        if (pi->parsed()) {
            const StepMapping A = stepMappingFromJson(mappingSpec(mappingArg));
            json j;
            int code = kExitOk;
            if (piMode == "step") {
                const TransfiniteResult r = stepProductIntegral(A, tol, budget);
                j = toJson(r);
                code = r.truncated ? kExitVerdictNegative : kExitOk;
            } else if (piMode == "riemann") {
                const ConvergenceReport rep =
                    riemannProductIntegral(EvalMapping::of(A), tol, levels);
                j = reportJson(rep);
                code = rep.converged ? kExitOk : kExitVerdictNegative;
            } else if (piMode == "commutative") {
                auto [lhs, rhs] = commutativeProductIntegral(A, tol, budget);
                j["product_route"] = toJson(lhs);
                j["exp_sum_route"] = toJson(rhs);
                j["distance"] = dist(lhs, rhs);
            } else {
                const BoundednessVerdict rc = riemannCriterion(A);
                const SummabilityVerdict bc = bochnerCriterion(A, std::max(tol, 1e-7), budget);
                j["riemann"] = boundednessJson(rc);
                j["bochner"] = toJson(bc);
                code = (!rc.bounded || bc.verdict != Verdict::Convergent) ? kExitVerdictNegative
                                                                          : kExitOk;
            }
            emit(j, out);
            return code;
        }

        if (st->parsed()) {
            json j;
            int code = kExitOk;
            if (stMode == "subst") {
                // subst needs a density/primitive pair; sqrtcos is the one
                // catalog entry carrying both
                if (mappingArg != "sqrtcos") {
                    std::cerr << "error[input]: subst mode needs a mapping with a known "
                                 "density; use --mapping sqrtcos\n";
                    return kExitInputError;
                }
                auto F = [](double t) { return t == 0.0 ? 0.0 : std::sqrt(t) * std::cos(M_PI / t); };
                auto fDen = [](double t) {
                    if (t == 0.0) return 0.0;
                    return std::cos(M_PI / t) / (2.0 * std::sqrt(t)) +
                           M_PI * std::sin(M_PI / t) / std::pow(t, 1.5);
                };
                const SubstitutionResult r =
                    substitutionCheck(fDen, F, 0.0, 1.0, std::max(tol, 1e-7));
                j["stieltjes_route"] = toJson(r.stieltjesRoute);
                j["exponential_route"] = toJson(r.exponentialRoute);
                j["distance"] = dist(r.stieltjesRoute, r.exponentialRoute);
                emit(j, out);
                return dist(r.stieltjesRoute, r.exponentialRoute) < 1e-3 ? kExitOk
                                                                         : kExitVerdictNegative;
            }
            const StepMapping A = stepMappingFromJson(mappingSpec(mappingArg));
            if (stMode == "ks") {
                const TransfiniteResult r = ksStepProduct(A, tol, budget);
                j = toJson(r);
                code = r.truncated || r.diverged() ? kExitVerdictNegative : kExitOk;
            } else if (stMode == "rs") {
                const ConvergenceReport rep = A.set.type() == SetType::Ladder
                                                  ? rsRefinementAligned(A, tol, levels)
                                                  : rsRefinement(EvalMapping::of(A), tol, levels);
                j = reportJson(rep);
                code = rep.converged ? kExitOk : kExitVerdictNegative;
            } else if (stMode == "pvar") {
                // nested prefixes of the step starts; sizes stay inside the
                // range where the dyadic values still resolve
                std::vector<std::vector<double>> parts;
                auto prefix = A.set.enumeratePrefix(A.set.hi(), 48);
                for (size_t count : {4u, 8u, 16u, 32u, 48u}) {
                    std::vector<double> pts;
                    for (size_t i = 0; i < prefix.indices.size() && i < count; ++i)
                        pts.push_back(A.set.value(prefix.indices[i]));
                    pts.push_back(A.set.hi());
                    if (pts.size() >= 3) parts.push_back(std::move(pts));
                }
                const PVariationEstimate est = pVariationProbe(EvalMapping::of(A), pExp, parts);
                j["p"] = est.p;
                j["lower_bounds"] = est.lowerBounds;
                j["verdict"] = est.verdict == PVariationEstimate::Verdict::GrowthWitness
                                   ? "growth-witness"
                                   : "finite-suggested";
                code = est.verdict == PVariationEstimate::Verdict::GrowthWitness
                           ? kExitVerdictNegative
                           : kExitOk;
            } else if (stMode == "scalar") {
                const ScalarRsReport rep = scalarRsConditions(A, std::max(tol, 1e-6));
                j["jumps_nonvanishing"] = rep.jumpsNonvanishing;
                j["jump_square_series"] = verdictName(rep.jumpSquareSeries);
                j["jump_square_partial"] = rep.jumpSquarePartial;
                j["partition_exhibited"] = rep.partitionExhibited;
                code = rep.jumpsNonvanishing && rep.jumpSquareSeries == Verdict::Convergent
                           ? kExitOk
                           : kExitVerdictNegative;
            } else if (stMode == "idem") {
                const IdempotentIdentityResult r = idempotentIdentity(A, tol, budget);
                j["stieltjes_side"] = toJson(r.stieltjesSide);
                j["product_side"] = toJson(r.productSide);
                j["distance"] = r.distance;
                code = r.distance < std::max(tol, 1e-9) ? kExitOk : kExitVerdictNegative;
            }
            emit(j, out);
            return code;
        }

        if (tr->parsed()) {
            json j;
            ProjectionPath P;
            if (pathName.rfind("latitude:", 0) == 0) {
                const double theta = std::stod(pathName.substr(9));
                P = projectionField(Surface::sphere(1.0), [theta](double t) {
                    return Vec3{std::sin(theta) * std::cos(2 * M_PI * t),
                                std::sin(theta) * std::sin(2 * M_PI * t), std::cos(theta)};
                });
            } else if (pathName.rfind("helix:", 0) == 0) {
                const double pitch = std::stod(pathName.substr(6));
                P = projectionField(Surface::cylinder(1.0), [pitch](double t) {
                    return Vec3{std::cos(2 * M_PI * t), std::sin(2 * M_PI * t), pitch * t};
                });
            } else if (pathName == "cube-corner") {
                const std::vector<Element> faces = {tangentProjection({0, 0, 1}),
                                                    tangentProjection({1, 0, 0}),
                                                    tangentProjection({0, 1, 0})};
                const Element T = polyhedralTransport(faces);
                j["transport"] = toJson(T);
                emit(j, out);
                return kExitOk;
            } else {
                std::cerr << "error[input]: unknown path " << pathName << "\n";
                return kExitInputError;
            }
            const ConvergenceReport rep = haahtiRefinement(P, tol, levels);
            const Element lim = transportLimit(rep);
            const Element oracle = transportOdeOracle(P);
            j["transport"] = toJson(lim);
            j["refinement"] = reportJson(rep);
            j["ode_oracle"] = toJson(oracle);
            j["oracle_distance"] = dist(lim, oracle);
            emit(j, out);
            return dist(lim, oracle) < 1e-3 ? kExitOk : kExitVerdictNegative;
        }

        if (gd->parsed()) {
            const StepMapping A = stepMappingFromJson(mappingSpec(mappingArg));
            const EvalMapping M = EvalMapping::of(A);
            json j;
            if (godeForm == "vdef") {
                std::vector<double> jumps;
                auto prefix = A.set.enumeratePrefix(A.set.hi(), 12);
                for (size_t i = 1; i < prefix.indices.size(); ++i)
                    jumps.push_back(A.set.value(prefix.indices[i]));
                jumps.push_back(A.set.hi());
                const Gode2Report rep = gode2Roundtrip(M, tol, std::min(levels, 8), jumps);
                j["v_conditions"] = {{"v1", rep.vConditions.v1},
                                     {"v2", rep.vConditions.v2},
                                     {"v3", rep.vConditions.v3},
                                     {"v4", rep.vConditions.v4}};
                j["convergence"] = reportJson(rep.productConvergence);
                json rows = json::array();
                double worst = 0.0;
                for (const auto& r : rep.residuals.rows) {
                    rows.push_back({{"m", r.m}, {"residual", r.residual}});
                    worst = std::max(worst, r.residual);
                }
                j["residuals"] = rows;
                j["residuals_decaying"] = rep.residuals.decaying;
                emit(j, out);
                return (rep.residuals.decaying || worst < 1e-12) ? kExitOk : kExitVerdictNegative;
            }
            const VFunction V = godeForm == "linear" ? fromALinear(M) : fromAStieltjes(M);
            const VConditionReport vc = checkVConditions(V, 12, std::max(tol, 1e-10));
            j["v_conditions"] = {{"v1", vc.v1}, {"v2", vc.v2}, {"v3", vc.v3}, {"v4", vc.v4}};
            emit(j, out);
            return (vc.v1 && vc.v2 && vc.v3 && vc.v4) ? kExitOk : kExitVerdictNegative;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error[input]: " << e.what() << "\n";
        return kExitInputError;
    } catch (const AlgebraError& e) {
        std::cerr << "error[compute]: " << e.what() << "\n";
        return kExitVerdictNegative;
    } catch (const OrdinalError& e) {
        std::cerr << "error[input]: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}
