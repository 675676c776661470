#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "kpiforge/jsonl.hpp"
#include "kpiforge/linkbase.hpp"
#include "support/fixtures.hpp"

using namespace kpiforge;

namespace {

const char* kPreHeader =
    "<?xml version=\"1.0\"?><link:linkbase xmlns:link=\"http://www.xbrl.org/2003/linkbase\" "
    "xmlns:xlink=\"http://www.w3.org/1999/xlink\">";

std::string loc(const std::string& frag, const std::string& label) {
    return "<link:loc xlink:type=\"locator\" xlink:href=\"gaap.xsd#" + frag + "\" xlink:label=\"" +
           label + "\"/>";
}

std::string pre_arc(const std::string& from, const std::string& to) {
    return "<link:presentationArc xlink:type=\"arc\" xlink:from=\"" + from + "\" xlink:to=\"" + to +
           "\" order=\"1\"/>";
}

}  // namespace

TEST_CASE("presentation arcs become parent to child edges") {
    std::string xml = std::string(kPreHeader) +
                      "<link:presentationLink xlink:role=\"http://x/role/A\">" +
                      loc("us-gaap_RevenuesAbstract", "l1") + loc("us-gaap_Revenues", "l2") +
                      pre_arc("l1", "l2") + "</link:presentationLink></link:linkbase>";
    auto edges = parse_linkbase(xml, LinkKind::presentation);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].parent == "us-gaap:RevenuesAbstract");
    CHECK(edges[0].child == "us-gaap:Revenues");
    CHECK(edges[0].kind == LinkKind::presentation);
    CHECK_FALSE(edges[0].weight.has_value());
    CHECK(valid_label(edges[0].parent));
    CHECK(valid_label(edges[0].child));
}

TEST_CASE("empty linkbase yields no edges") {
    std::string xml = std::string(kPreHeader) + "</link:linkbase>";
    CHECK(parse_linkbase(xml, LinkKind::presentation).empty());
}

TEST_CASE("duplicate arcs collapse to a single edge") {
    std::string xml = std::string(kPreHeader) + "<link:presentationLink>" +
                      loc("us-gaap_A", "l1") + loc("us-gaap_B", "l2") + pre_arc("l1", "l2") +
                      pre_arc("l1", "l2") + "</link:presentationLink></link:linkbase>";
    LinkbaseDiagnostics diag;
    auto edges = parse_linkbase(xml, LinkKind::presentation, &diag);
    CHECK(edges.size() == 1);
    CHECK(diag.duplicate_arcs == 1);
}

TEST_CASE("self loops are dropped and tallied") {
    std::string xml = std::string(kPreHeader) + "<link:presentationLink>" +
                      loc("us-gaap_A", "l1") + loc("us-gaap_A", "l2") + pre_arc("l1", "l2") +
                      "</link:presentationLink></link:linkbase>";
    LinkbaseDiagnostics diag;
    CHECK(parse_linkbase(xml, LinkKind::presentation, &diag).empty());
    CHECK(diag.self_loops == 1);
}

TEST_CASE("unresolvable locator skips the arc") {
    std::string xml = std::string(kPreHeader) + "<link:presentationLink>" +
                      loc("us-gaap_A", "l1") + pre_arc("l1", "l_missing") +
                      "</link:presentationLink></link:linkbase>";
    LinkbaseDiagnostics diag;
    CHECK(parse_linkbase(xml, LinkKind::presentation, &diag).empty());
    CHECK(diag.unresolved_locators == 1);
}

TEST_CASE("locator labels are scoped per extended link") {
    // same xlink:label bound to different concepts in two roles
    std::string xml = std::string(kPreHeader) + "<link:presentationLink xlink:role=\"http://x/r1\">" +
                      loc("us-gaap_P1", "p") + loc("us-gaap_C1", "c") + pre_arc("p", "c") +
                      "</link:presentationLink><link:presentationLink xlink:role=\"http://x/r2\">" +
                      loc("us-gaap_P2", "p") + loc("us-gaap_C2", "c") + pre_arc("p", "c") +
                      "</link:presentationLink></link:linkbase>";
    auto edges = parse_linkbase(xml, LinkKind::presentation);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0].parent == "us-gaap:P1");
    CHECK(edges[1].parent == "us-gaap:P2");
}

TEST_CASE("wrong kind file raises a typed error") {
    std::string cal = slurp_file(fixtures::dir() / "store/0001018840/0001018840-24-000019/cal.xml");
    CHECK_THROWS_AS(parse_linkbase(cal, LinkKind::presentation), KindMismatchError);
    auto edges = parse_linkbase(cal, LinkKind::calculation);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0].weight.has_value());
}

TEST_CASE("fixture linkbases parse with resolved prefixes") {
    std::string pre = slurp_file(fixtures::dir() / "store/0001018840/0001018840-24-000019/pre.xml");
    auto edges = parse_linkbase(pre, LinkKind::presentation);
    REQUIRE(edges.size() == 3);
    bool found = false;
    for (const auto& e : edges)
        if (e.parent == "us-gaap:RevenuesAbstract" && e.child == "us-gaap:Revenues") found = true;
    CHECK(found);
}

TEST_CASE("edge order is independent of arc declaration order") {
    std::string a = std::string(kPreHeader) + "<link:presentationLink>" + loc("us-gaap_P", "l1") +
                    loc("us-gaap_C1", "l2") + loc("us-gaap_C2", "l3") + pre_arc("l1", "l2") +
                    pre_arc("l1", "l3") + "</link:presentationLink></link:linkbase>";
    std::string b = std::string(kPreHeader) + "<link:presentationLink>" + loc("us-gaap_P", "l1") +
                    loc("us-gaap_C1", "l2") + loc("us-gaap_C2", "l3") + pre_arc("l1", "l3") +
                    pre_arc("l1", "l2") + "</link:presentationLink></link:linkbase>";
    auto ea = parse_linkbase(a, LinkKind::presentation);
    auto eb = parse_linkbase(b, LinkKind::presentation);
    auto key = [](const TaxonomyEdge& e) { return e.parent + "|" + e.child; };
    std::multiset<std::string> sa, sb;
    for (const auto& e : ea) sa.insert(key(e));
    for (const auto& e : eb) sb.insert(key(e));
    CHECK(sa == sb);
}

TEST_CASE("interchange records round trip") {
    namespace fs = std::filesystem;
    std::vector<EdgeRecord> records = {
        {"us-gaap:A", "us-gaap:B", LinkKind::presentation, "0000000000-24-000001"},
        {"us-gaap:A", "us-gaap:C", LinkKind::presentation, "0000000000-24-000002"},
    };
    fs::path tmp = fs::temp_directory_path() / "kpiforge_edges_test.jsonl";
    write_edge_records(tmp, records);
    CHECK(read_edge_records(tmp) == records);
    fs::remove(tmp);
}
