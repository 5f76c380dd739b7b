#pragma once

#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ffcomb/bounds.hpp"
#include "ffcomb/decompose.hpp"
#include "ffcomb/incidence.hpp"
#include "ffcomb/serialize.hpp"
#include "ffcomb/setops.hpp"
#include "ffcomb/subgroup.hpp"
#include "ffcomb/survey.hpp"

namespace ffcomb::cli {

enum ExitCode : int { ok = 0, usage_error = 1, hard_failure = 2, budget_exhausted = 3 };

enum class Format { human, json, csv };

namespace detail {

using ojson = nlohmann::ordered_json;

inline FpSet parse_set_arg(const PrimeField& f, const std::string& text) {
  return FpSet::from_values(f, ffcomb::detail::parse_int_list(text, "set element"));
}

/// Scalars of a flat JSON object as a header line and one value line.
inline void print_csv_flat(std::ostream& out, const ojson& j) {
  std::string head, row;
  for (const auto& [k, v] : j.items()) {
    if (v.is_structured()) continue;
    if (!head.empty()) {
      head += ',';
      row += ',';
    }
    head += k;
    row += v.is_string() ? v.get<std::string>() : v.dump();
  }
  out << head << '\n' << row << '\n';
}

inline void print_reports(std::ostream& out, Format fmt, const std::vector<BoundReport>& reports) {
  if (fmt == Format::csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : reports) out << csv_row(r) << '\n';
    return;
  }
  ojson arr = ojson::array();
  for (const auto& r : reports) arr.push_back(r);
  if (fmt == Format::json) {
    out << arr.dump() << '\n';
    return;
  }
  for (const auto& r : reports) {
    out << r.name << " [" << to_string(r.kind) << "] lhs=" << format_double(r.lhs) << " rhs=" << format_double(r.rhs)
        << " ratio=" << (std::isfinite(r.ratio) ? format_double(r.ratio) : std::string("n/a"));
    if (!r.preconditions_met) out << " preconditions_failed(" << r.precondition_note << ")";
    if (r.passed) out << (*r.passed ? " PASS" : " FAIL");
    for (const auto& fl : r.flags) out << " [" << fl << "]";
    out << '\n';
  }
}

inline int report_exit(const std::vector<BoundReport>& reports) {
  for (const auto& r : reports)
    if (r.hard_failure()) return hard_failure;
  return ok;
}

/// Emits a JSON-serializable result; human form is indented JSON.
inline void print_json_result(std::ostream& out, Format fmt, const ojson& j) {
  switch (fmt) {
    case Format::json: out << j.dump() << '\n'; break;
    case Format::csv: print_csv_flat(out, j); break;
    case Format::human: out << j.dump(2) << '\n'; break;
  }
}

}  // namespace detail

/// Parses argv, runs one subcommand and returns the process exit code:
/// 0 success, 1 usage or precondition error, 2 hard-assertion failure,
/// 3 search budget exhausted (the partial result is still printed).
inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using detail::ojson;
  CLI::App app{"Finite-field additive combinatorics toolkit", "ffcomb"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  std::string format = "human";
  std::uint64_t prime = 0;
  std::uint64_t order = 0;
  std::string set_a, set_b, set_c, set_d, set_main;
  std::uint64_t budget_nodes = 0;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "json", "csv"}));
  };
  auto add_prime = [&](CLI::App* s) { s->add_option("-p,--prime", prime, "Prime modulus")->required(); };
  auto add_budget = [&](CLI::App* s) {
    s->add_option("--budget", budget_nodes, "Search node budget (default: FFCOMB_BUDGET or 1e8)");
  };

  auto* c_subgroup = app.add_subcommand("subgroup", "Subgroup of order d in F_p^*");
  add_prime(c_subgroup);
  c_subgroup->add_option("-d,--order", order, "Subgroup order (divides p-1)")->required();
  add_common(c_subgroup);

  std::string op = "sum";
  bool rep = false, with_diagonal = false;
  auto* c_setop = app.add_subcommand("setop", "Sumset, difference, product or ratio set, or its representation function");
  add_prime(c_setop);
  c_setop->add_option("--op", op, "sum | diff | product | ratio")->check(CLI::IsMember({"sum", "diff", "product", "ratio"}));
  c_setop->add_option("-a,--a", set_a, "First set (comma-separated residues)")->required();
  c_setop->add_option("-b,--b", set_b, "Second set (defaults to the first)");
  c_setop->add_flag("--rep", rep, "Print the representation function instead of the set");
  c_setop->add_flag("--with-diagonal", with_diagonal, "Ratio set: also use pairs a = b");
  add_common(c_setop);

  std::string energy_kind = "additive";
  auto* c_energy = app.add_subcommand("energy", "Additive or multiplicative energy of a set or subgroup");
  add_prime(c_energy);
  auto* energy_set = c_energy->add_option("--set", set_main, "Set (comma-separated residues)");
  c_energy->add_option("-d,--order", order, "Use the subgroup of this order")->excludes(energy_set);
  c_energy->add_option("--kind", energy_kind, "additive | multiplicative")
      ->check(CLI::IsMember({"additive", "multiplicative"}));
  add_common(c_energy);

  bool support = false;
  auto* c_triples = app.add_subcommand("triples", "Collinear triples T(A,B,C) and the support T[A,B,C]");
  add_prime(c_triples);
  c_triples->add_option("--set", set_main, "Use A = B = C = this set");
  c_triples->add_option("-a,--a", set_a, "A");
  c_triples->add_option("-b,--b", set_b, "B");
  c_triples->add_option("-c,--c", set_c, "C");
  c_triples->add_flag("--support", support, "Also print T[A,B,C]");
  add_common(c_triples);

  bool oracle = false;
  auto* c_quads = app.add_subcommand("quadruples", "Collinear quadruples Q(A,B,C,D)");
  add_prime(c_quads);
  c_quads->add_option("--set", set_main, "Use A = B = C = D = this set");
  c_quads->add_option("-a,--a", set_a, "A");
  c_quads->add_option("-b,--b", set_b, "B");
  c_quads->add_option("-c,--c", set_c, "C");
  c_quads->add_option("-D,--d", set_d, "D");
  c_quads->add_flag("--oracle", oracle, "Count by enumerating lines instead");
  add_common(c_quads);

  auto* c_hist = app.add_subcommand("histogram", "Dyadic line histogram for A x A and B x B");
  add_prime(c_hist);
  c_hist->add_option("-a,--a", set_a, "A")->required();
  c_hist->add_option("-b,--b", set_b, "B (defaults to A)");
  add_common(c_hist);

  std::string bound;
  std::uint64_t eta1 = 1, eta2 = 1, xi = 1;
  std::string omega1, omega2;
  auto* c_check = app.add_subcommand("check", "Evaluate one of the bound checks on an instance");
  add_prime(c_check);
  c_check->add_option("--bound", bound, "theorem_Q | lemma_QABAB | T_support | energy | singleton | prop_main | AA_in_shift")
      ->required()
      ->check(CLI::IsMember({"theorem_Q", "lemma_QABAB", "T_support", "energy", "singleton", "prop_main", "AA_in_shift"}));
  c_check->add_option("--set", set_main, "Set A (theorem_Q, T_support, AA_in_shift; defaults to the subgroup)");
  c_check->add_option("-a,--a", set_a, "A (lemma_QABAB, prop_main)");
  c_check->add_option("-b,--b", set_b, "B (lemma_QABAB, prop_main)");
  c_check->add_option("-d,--order", order, "Subgroup order");
  c_check->add_option("--eta1", eta1, "prop_main: eta1");
  c_check->add_option("--eta2", eta2, "prop_main: eta2");
  c_check->add_option("--omega1", omega1, "prop_main: Omega1");
  c_check->add_option("--omega2", omega2, "prop_main: Omega2");
  c_check->add_option("--xi", xi, "AA_in_shift: coset factor");
  add_common(c_check);

  std::string shifts;
  auto* c_inter = app.add_subcommand("intersect", "|G ∩ (G + x_1) ∩ ... ∩ (G + x_k)| and its bounds");
  add_prime(c_inter);
  c_inter->add_option("-d,--order", order, "Subgroup order")->required();
  c_inter->add_option("--shifts", shifts, "Distinct nonzero shifts")->required();
  add_common(c_inter);

  bool first_only = false;
  auto* c_dec = app.add_subcommand("decompose", "Decompositions A = B + C");
  add_prime(c_dec);
  c_dec->add_option("--set", set_main, "Target set A")->required();
  c_dec->add_flag("--first", first_only, "Stop at the first witness");
  c_dec->add_flag("--oracle", oracle, "Use the subset brute force (|A| <= 12)");
  add_budget(c_dec);
  add_common(c_dec);

  auto* c_rdec = app.add_subcommand("ratio-decompose", "Decompositions S = B / B");
  add_prime(c_rdec);
  c_rdec->add_option("--set", set_main, "Target set S")->required();
  c_rdec->add_flag("--first", first_only, "Stop at the first witness");
  add_budget(c_rdec);
  add_common(c_rdec);

  auto* c_max = app.add_subcommand("maxset", "Largest A with A/A inside xi*G + 1");
  add_prime(c_max);
  c_max->add_option("-d,--order", order, "Subgroup order")->required();
  c_max->add_option("--xi", xi, "Coset factor (nonzero)")->required();
  add_budget(c_max);
  add_common(c_max);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path, csv_path;
  auto* c_survey = app.add_subcommand("survey", "Run a configured grid survey");
  c_survey->add_option("-c,--config", config_path, "key = value config file");
  c_survey->add_option("-s,--set", overrides, "Override a setting: key=value (repeatable)");
  c_survey->add_option("-o,--output", out_path, "JSONL output path");
  c_survey->add_option("--csv", csv_path, "CSV output path");
  add_common(c_survey);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return usage_error;
  }

  const Format fmt = format == "json" ? Format::json : format == "csv" ? Format::csv : Format::human;
  SearchBudget budget;
  if (budget_nodes > 0) budget.max_nodes = budget_nodes;

  try {
    auto field = [&] { return PrimeField(prime); };

    if (*c_subgroup) {
      const auto g = subgroup(field(), order);
      if (fmt == Format::human)
        out << g.elements.to_string() << '\n';
      else
        detail::print_json_result(out, fmt, ojson{{"p", g.modulus()}, {"d", g.order}, {"generator", g.generator},
                                                 {"elements", g.elements.to_string()}});
      return ok;
    }

    if (*c_setop) {
      const auto f = field();
      const FpSet a = detail::parse_set_arg(f, set_a);
      const FpSet b = set_b.empty() ? a : detail::parse_set_arg(f, set_b);
      const RepOp o = parse_rep_op(op);
      if (rep) {
        const CountTable t = rep_fn(a, b, o);
        if (fmt == Format::human) {
          for (residue x = 0; x < t.counts.size(); ++x)
            if (t.counts[x]) out << x << ' ' << t.counts[x] << '\n';
          if (t.infinity_count) out << "inf " << t.infinity_count << '\n';
        } else if (fmt == Format::csv) {
          out << "x,count\n";
          for (residue x = 0; x < t.counts.size(); ++x)
            if (t.counts[x]) out << x << ',' << t.counts[x] << '\n';
          if (t.infinity_count) out << "inf," << t.infinity_count << '\n';
        } else {
          out << ojson(t).dump() << '\n';
        }
        return ok;
      }
      FpSet r(f);
      switch (o) {
        case RepOp::sum: r = sumset(a, b); break;
        case RepOp::diff: r = diffset(a, b); break;
        case RepOp::product: r = productset(a, b); break;
        case RepOp::ratio: r = ratioset(a, b, !with_diagonal); break;
      }
      if (fmt == Format::human)
        out << r.to_string() << '\n';
      else
        detail::print_json_result(out, fmt, ojson{{"op", op}, {"result", r.to_string()}, {"size", r.size()}});
      return ok;
    }

    if (*c_energy) {
      const auto f = field();
      const FpSet a = order ? subgroup(f, order).elements : detail::parse_set_arg(f, set_main);
      const std::uint64_t e = energy_kind == "additive" ? additive_energy(a) : multiplicative_energy(a);
      if (fmt == Format::human)
        out << e << '\n';
      else
        detail::print_json_result(out, fmt, ojson{{"set", a.to_string()}, {"kind", energy_kind}, {"energy", e}});
      return ok;
    }

    auto pick = [&](const PrimeField& f, const std::string& s) {
      if (!s.empty()) return detail::parse_set_arg(f, s);
      if (!set_main.empty()) return detail::parse_set_arg(f, set_main);
      throw precondition_error("give --set or each of the individual sets");
    };

    if (*c_triples) {
      const auto f = field();
      const FpSet a = pick(f, set_a), b = pick(f, set_b), c = pick(f, set_c);
      const TripleCount t = triple_count(a, b, c);
      ojson j = t;
      if (support) j["support"] = triple_support(a, b, c).to_string();
      if (fmt == Format::human) {
        out << t.with_infinity << '\n';
        if (support) out << j["support"].get<std::string>() << '\n';
      } else {
        detail::print_json_result(out, fmt, j);
      }
      return ok;
    }

    if (*c_quads) {
      const auto f = field();
      const FpSet a = pick(f, set_a), b = pick(f, set_b), c = pick(f, set_c), d = pick(f, set_d);
      if (oracle) {
        const auto q = quad_count_geometric(a, b, c, d);
        if (fmt == Format::human)
          out << q << '\n';
        else
          detail::print_json_result(out, fmt, ojson{{"total", q}});
        return ok;
      }
      const QuadCount q = quad_count_Q(a, b, c, d);
      if (fmt == Format::human)
        out << q.total << '\n';
      else
        detail::print_json_result(out, fmt, ojson(q));
      return ok;
    }

    if (*c_hist) {
      const auto f = field();
      const FpSet a = detail::parse_set_arg(f, set_a);
      const FpSet b = set_b.empty() ? a : detail::parse_set_arg(f, set_b);
      const LineHistogram h = line_histogram(a, b);
      if (fmt == Format::csv) {
        out << "i,j,lines\n";
        for (const auto& [k, v] : h.buckets) out << k.first << ',' << k.second << ',' << v << '\n';
      } else if (fmt == Format::json) {
        out << ojson(h).dump() << '\n';
      } else {
        for (const auto& [k, v] : h.buckets) out << "L[" << k.first << "][" << k.second << "] = " << v << '\n';
        out << "weighted_sum = " << h.weighted_sum << '\n' << "dyadic_lower_sum = " << h.dyadic_lower_sum << '\n';
      }
      return ok;
    }

    if (*c_check) {
      const auto f = field();
      auto need_subgroup = [&] {
        if (!order) throw precondition_error("--bound " + bound + " needs -d");
        return subgroup(f, order);
      };
      auto main_set = [&] {
        if (!set_main.empty()) return detail::parse_set_arg(f, set_main);
        return need_subgroup().elements;
      };
      std::vector<BoundReport> reps;
      if (bound == "theorem_Q") {
        reps.push_back(check_theorem_Q(main_set()));
      } else if (bound == "lemma_QABAB") {
        reps.push_back(check_lemma_QABAB(detail::parse_set_arg(f, set_a), detail::parse_set_arg(f, set_b)));
      } else if (bound == "T_support") {
        reps = check_T_support_bounds(main_set());
      } else if (bound == "energy") {
        reps = check_energy_bounds(need_subgroup());
      } else if (bound == "singleton") {
        reps.push_back(check_singleton_remark(need_subgroup()));
      } else if (bound == "prop_main") {
        const auto g = need_subgroup();
        SigmaInput in{detail::parse_set_arg(f, set_a),
                      detail::parse_set_arg(f, set_b),
                      g,
                      static_cast<residue>(eta1 % prime),
                      static_cast<residue>(eta2 % prime),
                      detail::parse_set_arg(f, omega1),
                      detail::parse_set_arg(f, omega2)};
        reps = check_prop_main(in);
      } else {
        reps = check_AA_in_shift_bounds(main_set(), need_subgroup(), static_cast<residue>(xi % prime));
      }
      detail::print_reports(out, fmt, reps);
      return detail::report_exit(reps);
    }

    if (*c_inter) {
      const auto g = subgroup(field(), order);
      std::vector<residue> xs;
      for (auto v : ffcomb::detail::parse_int_list(shifts, "shift"))
        xs.push_back(g.field.reduce(v));
      const auto reps = check_intersection_bounds(g, xs);
      if (fmt == Format::human) out << "intersection = " << shifted_intersection(g, xs) << '\n';
      detail::print_reports(out, fmt, reps);
      return detail::report_exit(reps);
    }

    if (*c_dec) {
      const auto f = field();
      const FpSet a = detail::parse_set_arg(f, set_main);
      const DecompositionResult r = oracle ? sumset_decomposable_bruteforce(a) : sumset_decompositions(a, !first_only, budget);
      detail::print_json_result(out, fmt, ojson(r));
      return r.budget_exhausted ? budget_exhausted : ok;
    }

    if (*c_rdec) {
      const auto f = field();
      const DecompositionResult r = ratio_decompositions(detail::parse_set_arg(f, set_main), !first_only, budget);
      detail::print_json_result(out, fmt, ojson(r));
      return r.budget_exhausted ? budget_exhausted : ok;
    }

    if (*c_max) {
      const auto g = subgroup(field(), order);
      const MaxSetResult m = max_ratio_closed_set(g, static_cast<residue>(xi % prime), budget);
      detail::print_json_result(out, fmt, ojson(m));
      return m.exhaustive ? ok : budget_exhausted;
    }

    if (*c_survey) {
      SurveyConfig cfg = config_path.empty() ? SurveyConfig{} : load_survey_config(config_path);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw precondition_error("--set expects key=value, got '" + kv + "'");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (!out_path.empty()) cfg.output_path = out_path;
      if (!csv_path.empty()) cfg.csv_path = csv_path;
      const SurveySummary s = run_survey(cfg);
      detail::print_json_result(out, fmt == Format::csv ? Format::json : fmt, to_json(s));
      return s.ok() ? ok : hard_failure;
    }
  } catch (const precondition_error& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::overflow_error& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::logic_error& e) {
    err << "internal assertion failed: " << e.what() << '\n';
    return hard_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }
  err << app.help();
  return usage_error;
}

}  // namespace ffcomb::cli
