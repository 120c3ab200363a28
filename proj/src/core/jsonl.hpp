#pragma once

#include <iosfwd>
#include <string>

#include "graph.hpp"

namespace oec {

// Instance files are JSON Lines: a header {"n","delta","bipartite_sides"}
// followed by one {"v","edges"} line per arrival. An edge is [u, x] or, in
// implicit form, [u] meaning x = 1/delta.
Instance parse_instance(std::istream& in);
Instance parse_instance_text(const std::string& text);
Instance load_instance(const std::string& path);

std::string instance_to_jsonl(const Instance& inst, bool implicit_x = false);
void save_instance(const Instance& inst, const std::string& path, bool implicit_x = false);

std::string matching_to_json(const Matching& m);
Matching matching_from_json(const std::string& text);

std::string coloring_to_csv(const Coloring& col);
std::string coloring_to_json(const Coloring& col);
Coloring coloring_from_csv(std::istream& in);
Coloring coloring_from_json(const std::string& text);
Coloring load_coloring(const std::string& path);  // picks format by extension

// Shortest decimal string that parses back to exactly the same double.
std::string fmt_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace oec
