#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tmonad/laws.hpp"

using namespace tmonad;
using namespace testing_support;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> spec_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(TMONAD_SPEC_DIR)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

Error load_error(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const Error& e) {
    return e;
  }
  return Error(ErrorKind::Validation, "accepted");
}

const char* kSmall = R"((language small
  (placetaker-types *)
  (transition-types *)
  (operations (op app () ((arg () (hole *)) (arg () (hole *))) *))
  (state-functor S1 identity)
  (state-functor S2 identity)
  (rules
    (rule left () ((mv M () *) (mv M1 () *) (mv N () *))
      (premise * M M1)
      (conclude * (app M N) (app M1 N))))))";

}  // namespace

TEST(SpecFiles, PrintParseIsIdentity) {
  auto files = spec_files();
  ASSERT_GE(files.size(), 9u);
  for (const auto& f : files) {
    std::string text = slurp(f);
    Document doc = parse_document(text);
    EXPECT_EQ(print_document(doc), text) << f;
    EXPECT_EQ(parse_document(print_document(doc)).lang, doc.lang) << f;
  }
}

TEST(SpecFiles, MatchProgrammaticBundles) {
  for (const auto& f : spec_files()) {
    std::string name = f.stem().string();
    Document doc = parse_document(slurp(f));
    EXPECT_EQ(doc.lang, bundled(name)) << name;
    EXPECT_EQ(doc.gsos.has_value(), name == "gsos-sample");
  }
}

TEST(SpecParse, SmallLanguageLoads) {
  LanguageBundle lang = parse_spec(kSmall);
  EXPECT_EQ(lang.name, "small");
  ASSERT_EQ(lang.rules.size(), 1u);
  EXPECT_EQ(lang.rules[0].premises.size(), 1u);
  EXPECT_EQ(parse_spec(print_spec(lang)), lang);
}

TEST(SpecParse, EmptyOperationsGiveVariablesOnly) {
  LanguageBundle lang = parse_spec(R"((language bare
  (placetaker-types *)
  (transition-types *)
  (operations)
  (state-functor S1 identity)
  (state-functor S2 identity)
  (rules)))");
  EXPECT_TRUE(lang.monad.base.ops.empty());
  auto ts = enumerate_terms(lang.monad.base, Context(2, Type::atom("*")), Type::atom("*"), 5);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0]->kind, Node::Kind::Var);
  EXPECT_EQ(ts[1]->kind, Node::Kind::Var);
}

TEST(SpecParse, MalformedTextReportsPosition) {
  Error e = load_error("(language broken\n  (operations (op app ()\n");
  EXPECT_EQ(e.kind(), ErrorKind::Parse);
  EXPECT_TRUE(std::string(e.what()).find("2:") != std::string::npos) << e.what();
}

TEST(SpecParse, UndeclaredMetavariableIsRejected) {
  std::string text = kSmall;
  text.replace(text.find("(app M1 N)"), 10, "(app M1 Z)");
  Error e = load_error(text);
  EXPECT_EQ(e.kind(), ErrorKind::Validation) << e.what();
  EXPECT_TRUE(std::string(e.what()).find(':') != std::string::npos);
}

TEST(SpecParse, IllModedRuleIsRejected) {
  std::string text = kSmall;
  // the premise target metavariable never reaches a source position
  text.replace(text.find("(premise * M M1)"), 16, "(premise * M1 M)");
  Error e = load_error(text);
  EXPECT_TRUE(e.kind() == ErrorKind::IllModedRule || e.kind() == ErrorKind::Validation) << e.what();
}

TEST(SpecParse, TypeErrorsAreRejected) {
  std::string text = kSmall;
  text.replace(text.find("(app M N)"), 9, "(app M)");
  Error e = load_error(text);
  EXPECT_NE(std::string(e.what()), "accepted");
  EXPECT_TRUE(e.kind() == ErrorKind::Validation || e.kind() == ErrorKind::Arity) << e.what();
}

TEST(NamedSyntax, PrintParseRoundTrip) {
  for (const auto& name : primary_bundles()) {
    const auto& lang = bundled(name);
    Generator gen(lang, 13);
    for (int i = 0; i < 60; ++i) {
      NamedContext ctx;
      ctx.types = gen.context(1);
      for (std::size_t k = 0; k < ctx.types.size(); ++k) ctx.names.push_back("v" + std::to_string(k));
      Term t = gen.term(ctx.types, gen.type(), 3);
      if (!t) continue;
      std::string text = named_str(lang, ctx, t);
      NamedContext back = ctx;
      Type ty = typecheck_term(lang.monad.base, ctx.types, t);
      EXPECT_TRUE(same(parse_any(lang, text, Expect::Term, ty, back), t)) << name << " " << text;
      EXPECT_EQ(back.names, ctx.names);
      NamedContext canon = ctx;
      EXPECT_TRUE(same(parse_any(lang, to_sexpr(t), Expect::Term, ty, canon), t));
    }
  }
}

TEST(NamedSyntax, FreeNamesExtendTheContext) {
  const auto& lang = bundled("cbv-stlc");
  NamedContext ctx;
  Term s = state(lang, ctx, "(app (val f) (val y))", ty("A"));
  ASSERT_EQ(ctx.names.size(), 2u);
  EXPECT_EQ(ctx.types[0], ty("(-> A A)"));
  EXPECT_EQ(ctx.types[1], ty("A"));
  EXPECT_EQ(source_type(lang, ctx.types, s), ty("A"));
}
