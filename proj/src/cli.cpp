#include "tmonad/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "tmonad/languages.hpp"
#include "tmonad/laws.hpp"
#include "tmonad/syntax.hpp"

namespace tmonad {

namespace fs = std::filesystem;

Document load_document(const std::string& file) {
  std::error_code ec;
  if (fs::is_regular_file(file, ec)) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str());
  }
  std::string name = fs::path(file).filename().string();
  for (const char* ext : {".spec", ".gsos"})
    if (name.size() > std::strlen(ext) && name.ends_with(ext)) name.resize(name.size() - std::strlen(ext));
  const auto& names = bundle_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw Error(ErrorKind::UnknownLanguage, "no such file or bundled language: " + file);
  return parse_document(bundle_source(name));
}

namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Type read_type(const std::string& text) { return parse_type(read_sexpr(text)); }

NamedContext read_ctx(const std::string& text) {
  if (text.empty()) return {};
  return parse_named_context(read_sexpr(text));
}

std::optional<Expect> read_sort(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "term") return Expect::Term;
  if (s == "s1") return Expect::S1;
  if (s == "s2") return Expect::S2;
  throw Usage("--sort must be term, s1 or s2");
}

// First reading that parses, trying terms before states unless a sort is given.
std::pair<Term, Expect> read_object(const LanguageBundle& lang, const std::string& text, std::optional<Expect> sort,
                                    const std::optional<Type>& type, NamedContext& ctx) {
  std::vector<Expect> order = sort ? std::vector<Expect>{*sort} : std::vector<Expect>{Expect::Term, Expect::S1, Expect::S2};
  std::optional<Error> first;
  for (Expect e : order) {
    NamedContext trial = ctx;
    try {
      Term t = parse_any(lang, text, e, type, trial);
      ctx = std::move(trial);
      return {t, e};
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::Parse) throw;
      if (!first) first = err;
    }
  }
  throw *first;
}

Term read_state(const LanguageBundle& lang, const std::string& text, const std::optional<Type>& type,
                NamedContext& ctx) {
  return parse_any(lang, text, Expect::S1, type, ctx);
}

Type object_type(const LanguageBundle& lang, const Context& ctx, const Term& t, Expect e) {
  if (e == Expect::Term) return typecheck_term(lang.monad.base, ctx, t);
  return typecheck_state(lang.monad.base, e == Expect::S1 ? lang.s1 : lang.s2, ctx, t);
}

Term normal_form(const LanguageBundle& lang, const Context& ctx, const Term& t, Expect e) {
  return e == Expect::Term ? normalize(lang, ctx, t) : normalize_state(lang, ctx, t);
}

struct Printer {
  const LanguageBundle& lang;
  bool canonical = false;

  std::string operator()(const NamedContext& ctx, const Term& t) const {
    return canonical ? to_sexpr(t) : named_str(lang, ctx, t);
  }
};

// names for binders a subproof adds to its judgement context
NamedContext widen(const NamedContext& base, const Context& ctx) {
  NamedContext out = base;
  std::set<std::string> used(base.names.begin(), base.names.end());
  std::size_t k = 1;
  while (out.names.size() < ctx.size()) {
    std::string n;
    do n = "b" + std::to_string(k++);
    while (used.count(n));
    used.insert(n);
    out.names.push_back(n);
  }
  out.names.resize(ctx.size());
  out.types = ctx;
  return out;
}

void print_tree(std::ostream& os, const Printer& pr, const NamedContext& names, const Proof& p, int indent) {
  NamedContext nc = widen(names, p.ctx);
  os << std::string(indent, ' ') << p.rule << "  " << pr(nc, p.src) << " ~> " << pr(nc, p.tgt) << "\n";
  for (const auto& sp : p.subproofs) print_tree(os, pr, nc, *sp, indent + 2);
}

std::vector<Derivation> derive_from(const LanguageBundle& lang, const NamedContext& ctx, const Term& s,
                                    std::size_t fuel, std::size_t cap) {
  Type ty = source_type(lang, ctx.types, s);
  return derive(lang, ty, ctx.types, s, DeriveConfig{fuel, cap});
}

void write_file(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Usage("cannot write " + path);
  f << text;
}

std::set<std::set<std::string>> as_sets(const Partition& p) {
  std::set<std::set<std::string>> out;
  for (const auto& c : p.classes) {
    std::set<std::string> s;
    for (const auto& t : c) s.insert(to_sexpr(t));
    out.insert(s);
  }
  return out;
}

// two variables of the first placetaker type
Context default_oracle_ctx(const LanguageBundle& lang) {
  const auto& atoms = lang.monad.base.universe.atoms;
  if (atoms.empty()) return {};
  return Context(2, Type::atom(atoms.front()));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interpreter and law checker for languages given as transition monads", "tmonad"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string file, ctxText, typeText, sortText, text, other;
  std::size_t depth = 3, fuel = 8, cap = 8, maxSteps = 20, bound = 4;
  std::uint64_t seed = LawConfig{}.seed;
  std::size_t cases = LawConfig{}.cases, proofCases = LawConfig{}.proofCases;
  std::vector<std::string> seeds, only;
  std::string dotOut, recordsOut;
  bool canonical = false, json = false, print = false, all = false;

  auto common = [&](CLI::App* c) {
    c->add_option("FILE", file, "spec file or bundled language")->required();
    c->add_option("--ctx", ctxText, "named context, e.g. ((x A) (f (-> A A)))");
    c->add_flag("--canonical", canonical, "print (op ...) / (var i) forms");
  };

  auto* check = app.add_subcommand("check", "load and validate a spec");
  common(check);
  check->add_flag("--print", print, "print the normalized spec text");

  auto* en = app.add_subcommand("enum", "enumerate terms or states up to a depth");
  common(en);
  en->add_option("--type", typeText, "result type");
  en->add_option("--depth", depth, "maximal depth")->capture_default_str();
  en->add_option("--sort", sortText, "term, s1 or s2 (default term)");

  auto* nm = app.add_subcommand("normalize", "normal form modulo the equations");
  common(nm);
  nm->add_option("TERM", text)->required();
  nm->add_option("--type", typeText);
  nm->add_option("--sort", sortText);

  auto* eq = app.add_subcommand("equal", "decide equality modulo the equations");
  common(eq);
  eq->add_option("T", text)->required();
  eq->add_option("U", other)->required();
  eq->add_option("--type", typeText);
  eq->add_option("--sort", sortText);

  auto* dv = app.add_subcommand("derive", "derivable targets with proof trees");
  common(dv);
  dv->add_option("STATE", text)->required();
  dv->add_option("--type", typeText, "placetaker type of the source");
  dv->add_option("--fuel", fuel, "maximal proof height")->capture_default_str();
  dv->add_option("--proofs", cap, "proofs kept per target, 0 for all")->capture_default_str();
  dv->add_flag("--all", all, "print every kept proof, not only the first");
  dv->add_flag("--json", json, "JSON proof trees");

  auto* st = app.add_subcommand("step", "one-step targets");
  common(st);
  st->add_option("STATE", text)->required();
  st->add_option("--type", typeText);
  st->add_option("--fuel", fuel)->capture_default_str();

  auto* tr = app.add_subcommand("trace", "follow the first transition repeatedly");
  common(tr);
  tr->add_option("STATE", text)->required();
  tr->add_option("--type", typeText);
  tr->add_option("--fuel", fuel)->capture_default_str();
  tr->add_option("--max-steps", maxSteps)->capture_default_str();

  auto* sa = app.add_subcommand("saturate", "explore the transition system from seed states");
  common(sa);
  sa->add_option("--seeds", seeds, "seed states")->required();
  sa->add_option("--type", typeText);
  sa->add_option("--fuel", fuel)->capture_default_str();
  sa->add_option("--bound", bound, "exploration rounds")->capture_default_str();
  sa->add_option("--dot", dotOut, "write DOT here (- for stdout)");
  sa->add_option("--records", recordsOut, "write edge records here (default stdout)");

  auto* lw = app.add_subcommand("laws", "run the property suites");
  common(lw);
  lw->add_option("--seed", seed)->capture_default_str();
  lw->add_option("--cases", cases, "cases per syntactic law")->capture_default_str();
  lw->add_option("--proof-cases", proofCases, "proof/substitution pairs")->capture_default_str();
  lw->add_option("--depth", depth)->capture_default_str();
  lw->add_option("--law", only, "restrict to these laws");

  auto* orc = app.add_subcommand("oracle", "compare engines against enumeration oracles");
  common(orc);
  std::size_t oracleDepth = 0;
  orc->add_option("--depth", oracleDepth, "universe depth (default 2, GSOS 3)");

  auto* gc = app.add_subcommand("gsos-compile", "print the bundle compiled from a GSOS system");
  common(gc);

  std::vector<std::string> argv0{"tmonad"};
  argv0.insert(argv0.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv0) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Document doc = load_document(file);
    const LanguageBundle& lang = doc.lang;
    NamedContext ctx = read_ctx(ctxText);
    std::optional<Type> type;
    if (!typeText.empty()) type = read_type(typeText);
    Printer pr{lang, canonical};

    if (check->parsed()) {
      if (print) {
        out << print_document(doc);
      } else {
        out << lang.name << ": ok, " << lang.monad.base.ops.size() << " operations, " << lang.monad.equations.size()
            << " equations, " << lang.rules.size() << " rules\n";
      }
      return 0;
    }

    if (en->parsed()) {
      std::optional<Expect> sort = read_sort(sortText);
      Type ty = type ? *type : Type::atom(lang.monad.base.universe.atoms.at(0));
      Enumerator e(lang.monad.base);
      const std::vector<Term>* terms;
      if (!sort || *sort == Expect::Term)
        terms = &e.terms(ctx.types, ty, depth);
      else
        terms = &e.states(*sort == Expect::S1 ? lang.s1 : lang.s2, ctx.types, ty, depth);
      for (const auto& t : *terms) out << pr(ctx, t) << "\n";
      return 0;
    }

    if (nm->parsed()) {
      auto [t, e] = read_object(lang, text, read_sort(sortText), type, ctx);
      out << pr(ctx, normal_form(lang, ctx.types, t, e)) << "\n";
      return 0;
    }

    if (eq->parsed()) {
      auto [t, e] = read_object(lang, text, read_sort(sortText), type, ctx);
      Type ty = object_type(lang, ctx.types, t, e);
      auto [u, e2] = read_object(lang, other, e, ty, ctx);
      (void)e2;
      Term nt = normal_form(lang, ctx.types, t, e);
      Term nu = normal_form(lang, ctx.types, u, e);
      bool eqv = same(nt, nu);
      out << (eqv ? "equal" : "different") << "\n";
      return eqv ? 0 : 1;
    }

    if (dv->parsed()) {
      Term s = read_state(lang, text, type, ctx);
      auto ds = derive_from(lang, ctx, s, fuel, cap);
      if (json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        std::string last;
        for (const auto& [t, p] : ds) {
          std::string key = to_sexpr(t);
          if (!all && key == last) continue;
          last = key;
          nlohmann::ordered_json j;
          j["target"] = pr(ctx, t);
          j["proof"] = nlohmann::ordered_json::parse(proof_json(*p));
          arr.push_back(std::move(j));
        }
        out << arr.dump(2) << "\n";
      } else {
        std::string last;
        for (const auto& [t, p] : ds) {
          std::string key = to_sexpr(t);
          if (!all && key == last) continue;
          if (key != last) out << "target " << pr(ctx, t) << "\n";
          last = key;
          print_tree(out, pr, ctx, *p, 2);
        }
      }
      if (ds.empty()) {
        err << "no derivation\n";
        return 1;
      }
      return 0;
    }

    if (st->parsed()) {
      Term s = read_state(lang, text, type, ctx);
      std::set<Term, TermLess> targets;
      for (const auto& d : derive_from(lang, ctx, s, fuel, 1)) targets.insert(d.first);
      for (const auto& t : targets) out << pr(ctx, t) << "\n";
      return 0;
    }

    if (tr->parsed()) {
      Term s = read_state(lang, text, type, ctx);
      Engine engine(lang);
      out << "0  " << pr(ctx, s) << "\n";
      for (std::size_t k = 1; k <= maxSteps; ++k) {
        auto ds = engine.derive(source_type(lang, ctx.types, s), ctx.types, s, DeriveConfig{fuel, 1});
        if (ds.empty()) break;
        const auto& [t, p] = ds.front();
        out << k << "  " << pr(ctx, t) << "  [" << p->rule << "]\n";
        auto next = next_sources(lang, ctx.types, t);
        if (next.empty()) break;
        s = next.front();
      }
      return 0;
    }

    if (sa->parsed()) {
      std::vector<Term> ss;
      for (const auto& txt : seeds) ss.push_back(read_state(lang, txt, type, ctx));
      SaturateConfig cfg;
      cfg.derive = DeriveConfig{fuel, 1};
      cfg.stepBound = bound;
      LTS lts = saturate(lang, ctx.types, ss, cfg);
      if (!dotOut.empty()) write_file(dotOut, to_dot(lts), out);
      if (!recordsOut.empty())
        write_file(recordsOut, edge_records(lts), out);
      else if (dotOut != "-")
        out << edge_records(lts);
      return 0;
    }

    if (lw->parsed()) {
      LawConfig cfg;
      cfg.seed = seed;
      cfg.cases = cases;
      cfg.proofCases = proofCases;
      cfg.depth = depth;
      auto reports = run_laws(lang, cfg, only);
      out << format_reports(lang.name, reports);
      bool ok = std::all_of(reports.begin(), reports.end(), [](const LawReport& r) { return r.ok(); });
      return ok ? 0 : 1;
    }

    if (orc->parsed()) {
      bool ok = true, any = false;
      if (doc.gsos) {
        any = true;
        std::size_t d = oracleDepth ? oracleDepth : 3;
        const GSOSSystem& sys = *doc.gsos;
        auto oracle = gsos_oracle(sys, ctx.types, d, 64);
        std::vector<Term> universe = enumerate_terms(gsos_signature(sys), ctx.types, Type::atom("*"), d);
        std::vector<Term> seedStates;
        for (const auto& t : universe)
          seedStates.push_back(make_node(Node::Kind::State, "inj", {}, {Arg{{}, Val::of(t)}}));
        SaturateConfig cfg;
        cfg.derive = DeriveConfig{d + 2, 1};
        cfg.stepBound = 0;
        auto engine = as_labelled(extract_relation(saturate(lang, ctx.types, seedStates, cfg)));
        bool agree = engine == oracle;
        ok = ok && agree;
        out << "gsos depth " << d << ": " << universe.size() << " sources, engine " << engine.size() << " edges, oracle "
            << oracle.size() << " edges: " << (agree ? "agree" : "DISAGREE") << "\n";
      }
      std::size_t d = oracleDepth ? oracleDepth : 2;
      Context octx = ctxText.empty() ? default_oracle_ctx(lang) : ctx.types;
      auto compare_classes = [&](const std::string& what, const Type& ty, const Partition& q, const Partition& b) {
        bool agree = as_sets(q) == as_sets(b);
        ok = ok && agree;
        std::size_t members = 0;
        for (const auto& c : b.classes) members += c.size();
        out << what << " " << ty.str() << " depth " << d << ": " << members << " terms, oracle " << q.size()
            << " classes, backend " << b.size() << " classes: " << (agree ? "agree" : "DISAGREE") << "\n";
      };
      const auto& base = lang.monad.base;
      if (!lang.monad.equations.empty()) {
        any = true;
        std::size_t aug = default_aug_depth(lang.monad.equations, d);
        for (const auto& a : base.universe.atoms) {
          Type ty = Type::atom(a);
          auto q = quotient_oracle(lang.monad, octx, ty, d, aug);
          auto universe = enumerate_terms(base, octx, ty, d);
          auto b = partition_by(universe, [&](const Term& t) { return normalize(lang, octx, t); });
          compare_classes("terms", ty, q, b);
        }
      }
      if (!lang.s1.equations.empty()) {
        any = true;
        std::size_t aug = default_aug_depth(lang.s1.equations, d);
        for (const auto& a : lang.s1.universe.atoms) {
          Type ty = Type::atom(a);
          auto q = state_quotient_oracle(base, lang.s1, octx, ty, d, aug);
          Enumerator e(base);
          auto universe = e.states(lang.s1, octx, ty, d);
          auto b = partition_by(universe, [&](const Term& t) { return normalize_state(lang, octx, t); });
          compare_classes("states", ty, q, b);
        }
      }
      if (!any) out << lang.name << ": nothing to compare\n";
      return ok ? 0 : 1;
    }

    if (gc->parsed()) {
      if (!doc.gsos) throw Usage(file + " is not a gsos-system");
      out << print_spec(compile_gsos(*doc.gsos));
      return 0;
    }
  } catch (const Usage& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace tmonad
