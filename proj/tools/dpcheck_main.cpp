#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpcheck/counting.hpp"
#include "dpcheck/dsl.hpp"
#include "dpcheck/errors.hpp"
#include "dpcheck/gadgets.hpp"
#include "dpcheck/lowering.hpp"
#include "dpcheck/netlist.hpp"
#include "dpcheck/verifier.hpp"

namespace {

using nlohmann::json;
using namespace dpcheck;

constexpr int kExitHolds = 0;
constexpr int kExitViolated = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("cannot write '" + path + "'");
    }
    out << content;
}

std::vector<std::uint32_t> parse_values(const std::string& csv) {
    std::vector<std::uint32_t> values;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            values.push_back(static_cast<std::uint32_t>(std::stoul(item)));
        } catch (const std::exception&) {
            throw UsageError("bad input value '" + item + "'");
        }
    }
    return values;
}

json dist_to_json(const OutputDistribution& dist, std::uint32_t width) {
    json counts = json::object();
    for (const auto& [word, count] : dist.counts) {
        counts[word] = count.get_str();
    }
    json out;
    out["counts"] = std::move(counts);
    out["totalRandom"] = dist.totalRandom.get_str();
    out["successCount"] = dist.successCount.get_str();
    out["valueWidth"] = width;
    return out;
}

void print_dist_human(const OutputDistribution& dist, std::uint32_t record_width) {
    for (const auto& [word, count] : dist.counts) {
        std::cout << word;
        if (record_width > 0 && word.size() % record_width == 0) {
            std::cout << "  (";
            const auto values = values_from_word(word, record_width);
            for (std::size_t i = 0; i < values.size(); ++i) {
                std::cout << (i ? "," : "") << values[i];
            }
            std::cout << ")";
        }
        std::cout << "  " << count.get_str() << "\n";
    }
    std::cout << "total " << dist.totalRandom.get_str();
    if (dist.successCount != dist.totalRandom) {
        std::cout << "  success " << dist.successCount.get_str();
    }
    std::cout << "\n";
}

int print_verdict(const Verdict& verdict) {
    std::cout << verdict_to_json(verdict).dump(2) << "\n";
    return verdict.holds ? kExitHolds : kExitViolated;
}

json expected_to_json(const std::vector<ExpectedVerdict>& expected) {
    json arr = json::array();
    for (const ExpectedVerdict& e : expected) {
        arr.push_back({{"alpha", e.alpha.str()},
                       {"delta", e.delta.str()},
                       {"verdict", e.holds ? "holds" : "violated"}});
    }
    return arr;
}

struct GadgetOutput {
    Circuit circuit;
    json manifest;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact differential-privacy verifier for loop-free probabilistic programs"};
    app.require_subcommand(1);

    std::string program_path;
    std::string circuit_path;
    std::string out_path;
    std::string manifest_path;
    std::string input_csv;
    std::string alpha_text = "1/1";
    std::string delta_text = "0/1";
    std::string gamma_text = "1/1000000";
    std::string word;
    std::string phi_path;
    std::string variant_name;
    std::string p_text;
    std::string f_text = "1/2";
    std::string alpha2_text = "1/1";
    std::string delta2_text = "0/1";
    std::string gadget_kind;
    unsigned max_random = kDefaultMaxRandomBits;
    unsigned max_input_bits = kDefaultMaxInputBits;
    unsigned max_outputs = 3;
    std::uint64_t threshold_b = 0;
    std::uint32_t threshold_k = 1;
    std::uint32_t xvars = 0;
    bool want_success = false;
    bool want_all = false;
    bool as_json = false;

    app.add_flag("--json", as_json, "emit JSON on stdout");

    auto* compile_cmd = app.add_subcommand("compile", "compile a .dpp program to a netlist");
    compile_cmd->add_option("program", program_path, "program file")->required();
    compile_cmd->add_option("-o,--output", out_path, "netlist output path");

    auto* interpret_cmd = app.add_subcommand("interpret", "run the reference interpreter");
    interpret_cmd->add_option("program", program_path)->required();
    interpret_cmd->add_option("--input", input_csv, "comma-separated input values")->required();
    interpret_cmd->add_option("--max-random", max_random);

    auto* count_cmd = app.add_subcommand("count", "exact model counts over the random bits");
    count_cmd->add_option("circuit", circuit_path)->required();
    count_cmd->add_option("--input", input_csv)->required();
    count_cmd->add_option("--word", word, "count runs producing this output word");
    count_cmd->add_flag("--success", want_success, "count successful runs (conditioned)");
    count_cmd->add_flag("--all", want_all, "full output histogram");
    count_cmd->add_option("--max-random", max_random);

    auto* check_cmd = app.add_subcommand("check", "decide (eps, delta)-differential privacy");
    check_cmd->add_option("circuit", circuit_path)->required();
    check_cmd->add_option("--alpha", alpha_text, "e^eps as a rational u/v")->required();
    check_cmd->add_option("--delta", delta_text, "delta as a rational p/q");
    check_cmd->add_option("--max-random", max_random);
    check_cmd->add_option("--max-input-bits", max_input_bits);

    auto* mindelta_cmd = app.add_subcommand("min-delta", "minimal delta at a given alpha");
    mindelta_cmd->add_option("circuit", circuit_path)->required();
    mindelta_cmd->add_option("--alpha", alpha_text)->required();
    mindelta_cmd->add_option("--max-random", max_random);
    mindelta_cmd->add_option("--max-input-bits", max_input_bits);

    auto* mineps_cmd = app.add_subcommand("min-eps", "minimal alpha = e^eps at a given delta");
    mineps_cmd->add_option("circuit", circuit_path)->required();
    mineps_cmd->add_option("--delta", delta_text)->required();
    mineps_cmd->add_option("--gamma", gamma_text, "decimal precision for the printed epsilon");
    mineps_cmd->add_option("--max-random", max_random);
    mineps_cmd->add_option("--max-input-bits", max_input_bits);

    auto* oracle_cmd = app.add_subcommand("oracle-check", "brute-force event-space check");
    oracle_cmd->add_option("circuit", circuit_path)->required();
    oracle_cmd->add_option("--alpha", alpha_text)->required();
    oracle_cmd->add_option("--delta", delta_text);
    oracle_cmd->add_option("--max-outputs", max_outputs);
    oracle_cmd->add_option("--max-random", max_random);
    oracle_cmd->add_option("--max-input-bits", max_input_bits);

    auto* gadget_cmd = app.add_subcommand("gadget", "generate a fixture circuit + ground truth");
    gadget_cmd
        ->add_option("kind", gadget_kind,
                     "rr | rr-approx | allminsat | shape | threshold | allfrac | distinguish | "
                     "not-const")
        ->required();
    gadget_cmd->add_option("--p", p_text, "flip probability for rr");
    gadget_cmd->add_option("--alpha", alpha_text);
    gadget_cmd->add_option("--delta", delta_text);
    gadget_cmd->add_option("--alpha2", alpha2_text);
    gadget_cmd->add_option("--delta2", delta2_text);
    gadget_cmd->add_option("--phi", phi_path, "formula netlist (single output, no randoms)");
    gadget_cmd->add_option("--xvars", xvars, "leading formula variables treated as inputs");
    gadget_cmd->add_option("--variant", variant_name, "large-input | large-output | small-io");
    gadget_cmd->add_option("--b", threshold_b);
    gadget_cmd->add_option("--k", threshold_k);
    gadget_cmd->add_option("--f", f_text, "fraction bound for allfrac ground truth");
    gadget_cmd->add_option("-o,--output", out_path, "netlist output path");
    gadget_cmd->add_option("--manifest", manifest_path, "ground-truth JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        const Limits limits{max_random, max_input_bits};

        if (compile_cmd->parsed()) {
            const ProgramAst prog = parse_program(read_file(program_path));
            const std::string netlist = emit_netlist(compile(prog));
            if (!out_path.empty()) {
                write_file(out_path, netlist);
                if (as_json) std::cout << json{{"path", out_path}}.dump() << "\n";
            } else if (as_json) {
                std::cout << json{{"netlist", netlist}}.dump() << "\n";
            } else {
                std::cout << netlist;
            }
            return kExitHolds;
        }

        if (interpret_cmd->parsed()) {
            const ProgramAst prog = parse_program(read_file(program_path));
            const OutputDistribution dist = interpret(prog, parse_values(input_csv), max_random);
            if (as_json) {
                std::cout << dist_to_json(dist, prog.width).dump(2) << "\n";
            } else {
                print_dist_human(dist, prog.width);
            }
            return kExitHolds;
        }

        if (count_cmd->parsed()) {
            const Circuit circuit = parse_netlist(read_file(circuit_path));
            const InputWord x{parse_values(input_csv)};
            if (static_cast<int>(!word.empty()) + int(want_success) + int(want_all) != 1) {
                throw UsageError("pick exactly one of --word, --success, --all");
            }
            if (want_all) {
                const OutputDistribution dist = count_all(circuit, x, max_random);
                if (as_json) {
                    std::cout << dist_to_json(dist, circuit.record_width()).dump(2) << "\n";
                } else {
                    print_dist_human(dist, circuit.record_width());
                }
            } else {
                const BigInt n = want_success ? count_success(circuit, x, max_random)
                                              : count_outputs(circuit, x, word, max_random);
                if (as_json) {
                    std::cout << json{{"count", n.get_str()}}.dump() << "\n";
                } else {
                    std::cout << n.get_str() << "\n";
                }
            }
            return kExitHolds;
        }

        if (check_cmd->parsed()) {
            const Circuit circuit = parse_netlist(read_file(circuit_path));
            const EpsRatio alpha = EpsRatio::parse(alpha_text);
            const Rational delta = Rational::parse(delta_text);
            const Verdict verdict = delta.is_zero() ? check_pure_dp(circuit, alpha, limits)
                                                    : check_approx_dp(circuit, alpha, delta, limits);
            return print_verdict(verdict);
        }

        if (mindelta_cmd->parsed()) {
            const Circuit circuit = parse_netlist(read_file(circuit_path));
            const EpsRatio alpha = EpsRatio::parse(alpha_text);
            const Rational d = min_delta(circuit, alpha, limits);
            if (as_json) {
                std::cout << json{{"alpha", alpha.str()}, {"minDelta", d.str()}}.dump() << "\n";
            } else {
                std::cout << d.str() << "\n";
            }
            return kExitHolds;
        }

        if (mineps_cmd->parsed()) {
            const Circuit circuit = parse_netlist(read_file(circuit_path));
            const Rational delta = Rational::parse(delta_text);
            const Rational gamma = Rational::parse(gamma_text);
            const MinEpsResult result = min_eps_ratio(circuit, delta, limits);
            json out{{"delta", delta.str()}, {"alphaStar", result.str()}};
            if (!result.infinite) {
                out["epsHat"] = format_epsilon(result.alpha, gamma);
                out["gamma"] = gamma.str();
            }
            if (as_json) {
                std::cout << out.dump() << "\n";
            } else {
                std::cout << "alpha* = " << result.str() << "\n";
                if (!result.infinite) {
                    std::cout << "eps_hat = " << out["epsHat"].get<std::string>() << "\n";
                }
            }
            return kExitHolds;
        }

        if (oracle_cmd->parsed()) {
            const Circuit circuit = parse_netlist(read_file(circuit_path));
            const EpsRatio alpha = EpsRatio::parse(alpha_text);
            const Rational delta = Rational::parse(delta_text);
            return print_verdict(event_oracle_check(circuit, alpha, delta, limits, max_outputs));
        }

        if (gadget_cmd->parsed()) {
            auto load_phi = [&]() {
                if (phi_path.empty()) {
                    throw UsageError("this gadget needs --phi <netlist>");
                }
                return FormulaCircuit::from_circuit(parse_netlist(read_file(phi_path)));
            };

            GadgetOutput result;
            json params = json::object();
            if (gadget_kind == "rr") {
                const DyadicProb p = DyadicProb::from_rational(Rational::parse(p_text));
                result.circuit = gen_rr(p);
                params["p"] = p.value().str();
                result.manifest = {{"gadget", "rr"},
                                   {"params", params},
                                   {"expected", expected_to_json(rr_expected(p))}};
            } else if (gadget_kind == "rr-approx") {
                const DyadicProb d = DyadicProb::from_rational(Rational::parse(delta_text));
                const EpsRatio alpha = EpsRatio::parse(alpha_text);
                result.circuit = gen_rr_approx(d, alpha);
                params["delta"] = d.value().str();
                params["alpha"] = alpha.str();
                result.manifest = {{"gadget", "rr-approx"},
                                   {"params", params},
                                   {"expected", expected_to_json(rr_approx_expected(d, alpha))}};
            } else if (gadget_kind == "allminsat") {
                const FormulaCircuit phi = load_phi();
                result.circuit = gen_allminsat_gadget(phi, xvars);
                params["xvars"] = xvars;
                params["numVars"] = phi.num_vars;
                result.manifest = {{"gadget", "allminsat"},
                                   {"params", params},
                                   {"expected", expected_to_json(allminsat_expected(phi, xvars))}};
            } else if (gadget_kind == "shape") {
                const FormulaCircuit phi = load_phi();
                ShapeVariant variant;
                if (variant_name == "large-input") variant = ShapeVariant::LargeInput;
                else if (variant_name == "large-output") variant = ShapeVariant::LargeOutput;
                else if (variant_name == "small-io") variant = ShapeVariant::SmallIO;
                else throw UsageError("--variant must be large-input, large-output or small-io");
                result.circuit = gen_shape_gadget(variant, phi, xvars);
                params["variant"] = variant_name;
                params["xvars"] = xvars;
                result.manifest = {
                    {"gadget", "shape"},
                    {"params", params},
                    {"expected", expected_to_json(shape_expected(variant, phi, xvars))}};
            } else if (gadget_kind == "threshold") {
                result.circuit = gen_threshold(threshold_b, threshold_k);
                params["b"] = threshold_b;
                params["k"] = threshold_k;
                params["trueCount"] = threshold_b;
                result.manifest = {{"gadget", "threshold"},
                                   {"params", params},
                                   {"expected", json::array()}};
            } else if (gadget_kind == "allfrac") {
                const FormulaCircuit phi = load_phi();
                const Rational f = Rational::parse(f_text);
                result.circuit = gen_allfrac_gadget(phi, xvars);
                params["xvars"] = xvars;
                params["f"] = f.str();
                result.manifest = {{"gadget", "allfrac"},
                                   {"params", params},
                                   {"expected", expected_to_json(allfrac_expected(phi, xvars, f))}};
            } else if (gadget_kind == "distinguish") {
                const FormulaCircuit phi = load_phi();
                const EpsRatio alpha = EpsRatio::parse(alpha_text);
                const DyadicProb delta = DyadicProb::from_rational(Rational::parse(delta_text));
                const EpsRatio alpha2 = EpsRatio::parse(alpha2_text);
                const DyadicProb delta2 = DyadicProb::from_rational(Rational::parse(delta2_text));
                result.circuit = gen_distinguish_gadget(phi, alpha, delta, alpha2, delta2);
                params["alpha"] = alpha.str();
                params["delta"] = delta.value().str();
                params["alpha2"] = alpha2.str();
                params["delta2"] = delta2.value().str();
                result.manifest = {
                    {"gadget", "distinguish"},
                    {"params", params},
                    {"expected",
                     expected_to_json(distinguish_expected(phi, alpha, delta, alpha2, delta2))}};
            } else if (gadget_kind == "not-const") {
                const FormulaCircuit phi = load_phi();
                const FormulaCircuit augmented = augment_not_tautology(phi);
                result.circuit = augmented.circuit;
                const auto fractions = satisfying_fractions(augmented, 0);
                params["satisfiable"] = fractions[0].sign() > 0;
                params["tautology"] = fractions[0] == Rational(1);
                result.manifest = {{"gadget", "not-const"},
                                   {"params", params},
                                   {"expected", json::array()}};
            } else {
                throw UsageError("unknown gadget kind '" + gadget_kind + "'");
            }

            const std::string netlist = emit_netlist(result.circuit);
            if (!out_path.empty()) {
                write_file(out_path, netlist);
            } else if (!as_json) {
                std::cout << netlist;
            }
            if (!manifest_path.empty()) {
                write_file(manifest_path, result.manifest.dump(2) + "\n");
            }
            if (as_json) {
                json out = result.manifest;
                if (out_path.empty()) out["netlist"] = netlist;
                std::cout << out.dump(2) << "\n";
            }
            return kExitHolds;
        }

        throw UsageError("no subcommand");
    } catch (const ResourceBoundError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResource;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
