#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "espta/pta.hpp"

using namespace espta;
using pta::Var;

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

// Figure 1 with every handwritten spec merged in; returns the active names.
std::set<std::string> merge_all_specs(ir::ProgramBundle& b) {
  std::set<std::string> active;
  for (const auto& entry : std::filesystem::directory_iterator(
           std::string(kFixtureDir) + "/fig1_specs")) {
    auto frag = ir::parse_spec_fragment(read_file(entry.path().string()));
    auto names = ir::merge_spec_fragment(b, frag);
    active.insert(names.begin(), names.end());
  }
  return active;
}

const pta::ProxyObj kPStr{"String", {"mkStr", "get"}};

}  // namespace

TEST_CASE("pta: figure 1, all library functions missing, only rule 1 fires") {
  ir::ProgramBundle b = fig1();
  pta::PointsToSet pi = pta::compute_pointsto(b, {}, {});
  auto edges = pi.program_edges();
  REQUIRE(edges.size() == 1);
  CHECK(edges.begin()->var == Var{"main", "list"});
  CHECK(pta::to_string(edges.begin()->obj) == "site:o_list");
}

TEST_CASE("pta: injected counterexamples propagate to dataCopy") {
  ir::ProgramBundle b = fig1();
  pta::MissingEdgeSet miss;
  miss.edges.insert({{"main", "str"}, kPStr});
  miss.edges.insert({{"main", "data"}, kPStr});
  pta::PointsToSet pi = pta::compute_pointsto(b, {}, miss);
  CHECK(pi.contains({{"main", "dataCopy"}, kPStr}));
  CHECK(pi.contains({{"main", "str"}, kPStr}));
  CHECK(pi.contains({{"main", "list"}, pta::SiteObj{"o_list", "List"}}));
}

TEST_CASE("pta: figure 1 with all four specs active") {
  ir::ProgramBundle b = fig1();
  std::set<std::string> active = merge_all_specs(b);
  REQUIRE(active.size() == 4);
  pta::PointsToSet pi = pta::compute_pointsto(b, active, {});
  pta::SiteObj o_str{"o_str", "String"};
  CHECK(pi.contains({{"main", "str"}, o_str}));
  CHECK(pi.contains({{"main", "data"}, o_str}));
  CHECK(pi.contains({{"main", "dataCopy"}, o_str}));
}

TEST_CASE("pta: closure, re-applying the rules adds nothing") {
  ir::ProgramBundle b = fig1();
  std::set<std::string> active = merge_all_specs(b);
  pta::PointsToSet pi = pta::compute_pointsto(b, active, {});
  pta::MissingEdgeSet as_missing;
  as_missing.edges = pi.edges();
  pta::PointsToSet again = pta::compute_pointsto(b, active, as_missing);
  CHECK(again == pi);
}

TEST_CASE("pta: monotone in the missing-edge set and in the spec set") {
  ir::ProgramBundle b = fig1();
  std::set<std::string> active = merge_all_specs(b);

  pta::MissingEdgeSet small;
  small.edges.insert({{"main", "str"}, kPStr});
  pta::MissingEdgeSet big = small;
  big.edges.insert({{"main", "data"}, kPStr});

  auto sub = pta::compute_pointsto(b, {}, small).edges();
  auto super = pta::compute_pointsto(b, {}, big).edges();
  CHECK(std::includes(super.begin(), super.end(), sub.begin(), sub.end()));

  auto no_specs = pta::compute_pointsto(b, {}, small).edges();
  auto with_specs = pta::compute_pointsto(b, active, small).edges();
  CHECK(std::includes(with_specs.begin(), with_specs.end(), no_specs.begin(),
                      no_specs.end()));
}

TEST_CASE("pta: may_alias") {
  ir::ProgramBundle b = fig1();
  pta::MissingEdgeSet miss;
  miss.edges.insert({{"main", "str"}, kPStr});
  miss.edges.insert({{"main", "data"}, kPStr});
  pta::PointsToSet pi = pta::compute_pointsto(b, {}, miss);

  CHECK(pta::may_alias(pi, {"main", "str"}, {"main", "dataCopy"}));
  CHECK(!pta::may_alias(pi, {"main", "list"}, {"main", "str"}));
  CHECK_THROWS_AS(pta::may_alias(pi, {"main", "nonesuch"}, {"main", "str"}),
                  pta::UnknownVariable);
  // Spec variables are not client-queryable.
  ir::ProgramBundle bs = fig1();
  std::set<std::string> active = merge_all_specs(bs);
  pta::PointsToSet pis = pta::compute_pointsto(bs, active, {});
  CHECK_THROWS_AS(pta::may_alias(pis, {"mkStr", "libStr"}, {"main", "str"}),
                  pta::UnknownVariable);
}

TEST_CASE("pta: points_to_classes") {
  ir::ProgramBundle b = fig1();
  pta::MissingEdgeSet miss;
  miss.edges.insert({{"main", "str"}, kPStr});
  pta::PointsToSet pi = pta::compute_pointsto(b, {}, miss);
  CHECK(pta::points_to_classes(pi, {"main", "str"}) ==
        std::set<std::string>{"String"});
  CHECK(pta::points_to_classes(pi, {"main", "data"}).empty());
}

TEST_CASE("pta: taint flows on figure 1") {
  ir::ProgramBundle b = fig1();

  SUBCASE("optimistic analysis misses the leak") {
    pta::PointsToSet pi = pta::compute_pointsto(b, {}, {});
    CHECK(pta::taint_flows(b, {}, pi).empty());
  }
  SUBCASE("after the loop's counterexamples the leak is found") {
    pta::MissingEdgeSet miss;
    miss.edges.insert({{"main", "str"}, kPStr});
    miss.edges.insert({{"main", "data"}, kPStr});
    pta::PointsToSet pi = pta::compute_pointsto(b, {}, miss);
    auto flows = pta::taint_flows(b, {}, pi);
    CHECK(flows == std::set<std::pair<std::string, std::string>>{
                       {"mkStr", "sendHttp"}});
  }
  SUBCASE("no sinks, no flows") {
    ir::ProgramBundle c = fig1();
    c.sinks.clear();
    pta::MissingEdgeSet miss;
    miss.edges.insert({{"main", "str"}, kPStr});
    miss.edges.insert({{"main", "data"}, kPStr});
    pta::PointsToSet pi = pta::compute_pointsto(c, {}, miss);
    CHECK(pta::taint_flows(c, {}, pi).empty());
  }
}

TEST_CASE("pta: serialization is sorted and parses back") {
  ir::ProgramBundle b = fig1();
  pta::MissingEdgeSet miss;
  miss.edges.insert({{"main", "str"}, kPStr});
  miss.edges.insert({{"main", "data"}, kPStr});
  pta::PointsToSet pi = pta::compute_pointsto(b, {}, miss);
  std::string text = pi.serialize();
  CHECK(text ==
        "main::data -> proxy:String:{get,mkStr}\n"
        "main::dataCopy -> proxy:String:{get,mkStr}\n"
        "main::list -> site:o_list\n"
        "main::str -> proxy:String:{get,mkStr}\n");

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    pta::Edge e = pta::parse_edge(line, b);
    CHECK(pi.contains(e));
  }
  CHECK(pi.hash().size() == 16);
}
