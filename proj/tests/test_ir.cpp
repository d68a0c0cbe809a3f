#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "espta/ir.hpp"

using namespace espta;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kFixtureDir = "tests/fixtures";

ir::ProgramBundle fig1() {
  return ir::parse_program(read_file(std::string(kFixtureDir) + "/fig1.ir"));
}

}  // namespace

TEST_CASE("parse: figure-1 bundle structure") {
  ir::ProgramBundle b = fig1();
  CHECK(b.entry == "main");
  CHECK(b.classes.size() == 2);
  CHECK(b.fields.size() == 1);
  CHECK(b.fields[0].owner == ir::FieldOwner::Library);

  const ir::FunctionDecl* main_fn = b.find("main", ir::FunctionKind::Program);
  REQUIRE(main_fn != nullptr);

  std::set<std::string> vars;
  std::set<std::string> sites;
  ir::for_each_statement(main_fn->body, [&](const ir::Statement& s) {
    if (const auto* a = std::get_if<ir::AllocStmt>(&s.node)) {
      vars.insert(a->target);
      sites.insert(s.id);
    } else if (const auto* as = std::get_if<ir::AssignStmt>(&s.node)) {
      vars.insert(as->target);
    } else if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
      if (!call->target.empty()) vars.insert(call->target);
    }
  });
  CHECK(vars == std::set<std::string>{"str", "list", "data", "dataCopy"});
  CHECK(sites == std::set<std::string>{"o_list"});

  CHECK(b.sources == std::vector<std::string>{"mkStr"});
  CHECK(b.sinks == std::vector<std::string>{"sendHttp"});
  CHECK(b.library_function_names() ==
        std::vector<std::string>{"mkStr", "sendHttp", "add", "get"});
}

TEST_CASE("parse: deterministic statement ids") {
  ir::ProgramBundle b = fig1();
  const ir::FunctionDecl* main_fn = b.find("main", ir::FunctionKind::Program);
  std::vector<std::string> ids;
  ir::for_each_statement(main_fn->body,
                         [&](const ir::Statement& s) { ids.push_back(s.id); });
  CHECK(ids == std::vector<std::string>{"o_list", "main:1", "main:2", "main:3",
                                        "main:4", "main:5", "main:6"});
}

TEST_CASE("parse: empty input has no entry function") {
  CHECK_THROWS_WITH_AS(ir::parse_program(""), doctest::Contains("no entry"),
                       ir::ParseError);
}

TEST_CASE("parse: error cases carry positions") {
  CHECK_THROWS_AS(ir::parse_program("garbage\n"), ir::ParseError);
  CHECK_THROWS_WITH_AS(
      ir::parse_program("class A\nclass A\nfunc main() program {\n}\n"),
      doctest::Contains("duplicate class"), ir::ParseError);
  CHECK_THROWS_WITH_AS(ir::parse_program("func main() program {\n"
                                         "  x = call nope()\n"
                                         "}\n"),
                       doctest::Contains("unresolved callee"), ir::ParseError);
  CHECK_THROWS_WITH_AS(ir::parse_program("func main() program {\n"
                                         "  x = new A\n"
                                         "}\n"),
                       doctest::Contains("unknown class"), ir::ParseError);
  CHECK_THROWS_WITH_AS(
      ir::parse_program("class A\n"
                        "func main() program {\n"
                        "  x = new A @s1\n"
                        "  y = new A @s1\n"
                        "}\n"),
      doctest::Contains("duplicate statement id"), ir::ParseError);
}

TEST_CASE("print/parse round-trip on figure 1") {
  ir::ProgramBundle b = fig1();
  std::string text = ir::print_program(b);
  ir::ProgramBundle again = ir::parse_program(text);
  CHECK(again == b);
  // Once more, to make sure printing is canonical.
  CHECK(ir::print_program(again) == text);
}

TEST_CASE("spec fragments parse and merge") {
  ir::ProgramBundle b = fig1();
  ir::SpecFragment frag = ir::parse_spec_fragment(
      read_file(std::string(kFixtureDir) + "/fig1_specs/mkStr.spec"));
  REQUIRE(frag.specs.size() == 1);
  CHECK(frag.specs[0].kind == ir::FunctionKind::LibrarySpec);
  std::set<std::string> active = ir::merge_spec_fragment(b, frag);
  CHECK(active == std::set<std::string>{"mkStr"});
  REQUIRE(b.spec_of("mkStr") != nullptr);
  CHECK(b.spec_of("mkStr")->body.size() == 2);
  CHECK(b.is_missing("mkStr", active) == false);
  CHECK(b.is_missing("get", active) == true);
  CHECK(b.is_missing("main", active) == false);

  CHECK_THROWS(ir::merge_spec_fragment(b, frag));  // duplicate spec
}

TEST_CASE("proxyspec lines synthesize allocation specs") {
  ir::ProgramBundle b = fig1();
  ir::SpecFragment frag = ir::parse_spec_fragment("proxyspec String mkStr\n");
  std::set<std::string> active = ir::merge_spec_fragment(b, frag);
  CHECK(active == std::set<std::string>{"mkStr"});
  const ir::FunctionDecl* spec = b.spec_of("mkStr");
  REQUIRE(spec != nullptr);
  REQUIRE(spec->body.size() == 2);
  CHECK(spec->body[0].id == "mkStr__proxy");
  CHECK(std::holds_alternative<ir::AllocStmt>(spec->body[0].node));
}

TEST_CASE("validate: figure 1 is clean") {
  CHECK(ir::validate_program(fig1()).empty());
}

TEST_CASE("validate: program access to a library field") {
  ir::ProgramBundle b = ir::parse_program(
      "class A\n"
      "field g library\n"
      "func main() program {\n"
      "  y = new A @o1\n"
      "  x = y.g\n"
      "}\n");
  auto violations = ir::validate_program(b);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == ir::ViolationKind::SharedFieldViolation);
}

TEST_CASE("validate: ground truth touching a program field") {
  ir::ProgramBundle b = ir::parse_program(
      "class A\n"
      "field p program\n"
      "func main() program {\n"
      "  y = new A @o1\n"
      "  call stash(y)\n"
      "}\n"
      "func stash(ob) library {\n"
      "  ob.p = ob\n"
      "}\n");
  auto violations = ir::validate_program(b);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == ir::ViolationKind::LibraryTouchesProgramField);
}

TEST_CASE("validate: recursive call graphs are rejected") {
  ir::ProgramBundle b = ir::parse_program(
      "func main() program {\n"
      "  call main()\n"
      "}\n");
  auto violations = ir::validate_program(b);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == ir::ViolationKind::RecursionViolation);
}

TEST_CASE("rewrite: loads and stores of library fields become accessor calls") {
  ir::ProgramBundle b = ir::parse_program(
      "class A\n"
      "field elems library\n"
      "func main() program {\n"
      "  list = new A @o1\n"
      "  data = list.elems\n"
      "  list.elems = data\n"
      "}\n");
  REQUIRE(ir::validate_program(b).size() == 2);
  ir::ProgramBundle r = ir::rewrite_shared_fields(b);
  CHECK(ir::validate_program(r).empty());

  const ir::FunctionDecl* main_fn = r.find("main", ir::FunctionKind::Program);
  const auto* load_call = std::get_if<ir::CallStmt>(&main_fn->body[1].node);
  REQUIRE(load_call != nullptr);
  CHECK(load_call->callee == "get_elems");
  CHECK(load_call->target == "data");
  CHECK(load_call->args == std::vector<std::string>{"list"});
  CHECK(main_fn->body[1].id == "main:1");  // ids stable under rewrite

  const auto* store_call = std::get_if<ir::CallStmt>(&main_fn->body[2].node);
  REQUIRE(store_call != nullptr);
  CHECK(store_call->callee == "set_elems");
  CHECK(store_call->target.empty());
  CHECK(store_call->args == std::vector<std::string>{"list", "data"});

  REQUIRE(r.find("get_elems", ir::FunctionKind::LibraryGroundTruth) != nullptr);
  REQUIRE(r.find("set_elems", ir::FunctionKind::LibraryGroundTruth) != nullptr);

  // After the rewrite every program field access is to a program field.
  for (const auto* f : r.program_functions()) {
    ir::for_each_statement(f->body, [&](const ir::Statement& s) {
      CHECK(!std::holds_alternative<ir::LoadStmt>(s.node));
      CHECK(!std::holds_alternative<ir::StoreStmt>(s.node));
    });
  }
}

TEST_CASE("rewrite: identity on bundles without shared-field accesses") {
  ir::ProgramBundle b = fig1();
  CHECK(ir::rewrite_shared_fields(b) == b);
}
