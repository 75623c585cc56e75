#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "graphdiff/error.hpp"
#include "graphdiff/graph.hpp"

namespace graphdiff {

// Edge-list file format (documented byte-exact in the README):
//   - a file holds one or more graph blocks, concatenated;
//   - each block starts with a header line `n <count>`;
//   - each following line is `u v` or `u v <edge_type>`, 0-indexed, one edge
//     per line, until the next header or end of file;
//   - node attributes live in an optional sidecar `<path>.nodes` with the
//     same block structure and `v <node_type>` lines; block i annotates
//     graph i of the main file.
// Lines are '\n'-terminated; fields are separated by single spaces; blank
// lines and lines starting with '#' are ignored.

namespace detail {

inline bool is_header(const std::string& line) {
  return line.size() >= 2 && line[0] == 'n' && (line[1] == ' ' || line[1] == '\t');
}

struct Block {
  int n = 0;
  std::vector<std::vector<long>> rows;  // parsed numeric fields per line
  std::vector<int> line_numbers;
};

inline std::vector<Block> parse_blocks(std::istream& in, const std::string& what) {
  std::vector<Block> blocks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = what + ":" + std::to_string(line_no);
    if (is_header(line)) {
      std::istringstream ls(line);
      std::string tag;
      long n = -1;
      ls >> tag >> n;
      require(!ls.fail() && n >= 0, ErrorCategory::parse, where + ": malformed header");
      blocks.push_back(Block{static_cast<int>(n), {}, {}});
      continue;
    }
    require(!blocks.empty(), ErrorCategory::parse, where + ": data before first header");
    std::istringstream ls(line);
    std::vector<long> fields;
    long v;
    while (ls >> v) fields.push_back(v);
    require(ls.eof(), ErrorCategory::parse, where + ": non-numeric field");
    require(!fields.empty(), ErrorCategory::parse, where + ": empty record");
    blocks.back().rows.push_back(std::move(fields));
    blocks.back().line_numbers.push_back(line_no);
  }
  return blocks;
}

}  // namespace detail

inline std::vector<Graph> load_edge_list(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open edge-list file: " + path);
  auto blocks = detail::parse_blocks(in, path);
  require(!blocks.empty(), ErrorCategory::parse, path + ": no graph blocks found");

  std::vector<Graph> graphs;
  graphs.reserve(blocks.size());
  for (const auto& b : blocks) {
    Graph g(b.n);
    for (size_t r = 0; r < b.rows.size(); ++r) {
      const auto& f = b.rows[r];
      const std::string where = path + ":" + std::to_string(b.line_numbers[r]);
      require(f.size() == 2 || f.size() == 3, ErrorCategory::parse, where + ": expected `u v [edge_type]`");
      require(f[0] >= 0 && f[0] < b.n && f[1] >= 0 && f[1] < b.n, ErrorCategory::parse,
              where + ": endpoint out of range");
      require(f[0] != f[1], ErrorCategory::parse, where + ": self loop");
      const int type = f.size() == 3 ? static_cast<int>(f[2]) : 1;
      require(type > 0, ErrorCategory::parse, where + ": edge type must be positive");
      g.add_edge(static_cast<int>(f[0]), static_cast<int>(f[1]), type);
    }
    graphs.push_back(std::move(g));
  }

  const std::string sidecar = path + ".nodes";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream nin(sidecar);
    require(nin.good(), ErrorCategory::io, "cannot open node sidecar: " + sidecar);
    auto nblocks = detail::parse_blocks(nin, sidecar);
    require(nblocks.size() == graphs.size(), ErrorCategory::parse,
            sidecar + ": block count does not match edge-list file");
    for (size_t i = 0; i < nblocks.size(); ++i) {
      const auto& b = nblocks[i];
      require(b.n == graphs[i].n(), ErrorCategory::parse,
              sidecar + ": node count mismatch in block " + std::to_string(i));
      std::vector<int> attrs(static_cast<size_t>(b.n), 0);
      for (size_t r = 0; r < b.rows.size(); ++r) {
        const auto& f = b.rows[r];
        const std::string where = sidecar + ":" + std::to_string(b.line_numbers[r]);
        require(f.size() == 2, ErrorCategory::parse, where + ": expected `v node_type`");
        require(f[0] >= 0 && f[0] < b.n, ErrorCategory::parse, where + ": node out of range");
        attrs[static_cast<size_t>(f[0])] = static_cast<int>(f[1]);
      }
      graphs[i].set_node_attrs(std::move(attrs));
    }
  }
  return graphs;
}

inline void save_edge_list(const std::string& path, const std::vector<Graph>& graphs) {
  std::ofstream out(path);
  require(out.good(), ErrorCategory::io, "cannot write edge-list file: " + path);
  bool any_node_attrs = false;
  for (const auto& g : graphs) any_node_attrs = any_node_attrs || g.has_node_attrs();
  for (const auto& g : graphs) {
    out << "n " << g.n() << "\n";
    for (int u = 0; u < g.n(); ++u) {
      for (int v = u + 1; v < g.n(); ++v) {
        if (!g.has_edge(u, v)) continue;
        out << u << " " << v;
        if (g.has_edge_attrs()) out << " " << g.edge_attr(u, v);
        out << "\n";
      }
    }
  }
  require(out.good(), ErrorCategory::io, "write failed: " + path);
  if (any_node_attrs) {
    std::ofstream nout(path + ".nodes");
    require(nout.good(), ErrorCategory::io, "cannot write node sidecar: " + path + ".nodes");
    for (const auto& g : graphs) {
      nout << "n " << g.n() << "\n";
      if (g.has_node_attrs())
        for (int v = 0; v < g.n(); ++v) nout << v << " " << g.node_attr(v) << "\n";
    }
    require(nout.good(), ErrorCategory::io, "write failed: " + path + ".nodes");
  }
}

}  // namespace graphdiff
