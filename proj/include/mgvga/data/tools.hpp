/*
 * Copyright 2026 The mgvga Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*!
  \file tools.hpp
  \brief Subprocess drivers for ABC and yosys

  Generated scripts are written into the run directory and kept there.
*/

#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "sequences.hpp"
#include "../aig/aiger.hpp"
#include "../util/hash.hpp"
#include "../util/kv_config.hpp"
#include "../util/subprocess.hpp"

namespace mgvga
{

enum class tool_error_kind
{
  missing_binary,
  nonzero_exit,
  timeout,
  unparseable_output
};

inline std::string to_string( tool_error_kind k )
{
  switch ( k )
  {
  case tool_error_kind::missing_binary:
    return "missing_binary";
  case tool_error_kind::nonzero_exit:
    return "nonzero_exit";
  case tool_error_kind::timeout:
    return "timeout";
  case tool_error_kind::unparseable_output:
    return "unparseable_output";
  }
  return "unknown";
}

class tool_error : public std::runtime_error
{
public:
  tool_error( tool_error_kind kind, std::string const& msg, std::string output = {} )
      : std::runtime_error( msg ), kind_( kind ), output_( std::move( output ) )
  {
  }
  tool_error_kind kind() const { return kind_; }
  /*! \brief Captured tool stdout/stderr. */
  std::string const& output() const { return output_; }

private:
  tool_error_kind kind_;
  std::string output_;
};

struct tool_config
{
  std::string abc;   /* empty: use the built-in toy transforms */
  std::string yosys; /* empty: use the built-in Verilog front-end */
  std::chrono::milliseconds timeout{ 120000 };

  static tool_config from( kv_config& cfg )
  {
    tool_config t;
    t.abc = cfg.get_string( "tools.abc", t.abc );
    t.yosys = cfg.get_string( "tools.yosys", t.yosys );
    t.timeout = std::chrono::milliseconds( static_cast<std::int64_t>( cfg.get_double( "tools.timeout_s", 120.0 ) * 1000.0 ) );
    return t;
  }
};

namespace detail
{

inline std::filesystem::path require_tool( std::string const& program, char const* what )
{
  const auto exe = find_executable( program );
  if ( exe.empty() )
  {
    throw tool_error( tool_error_kind::missing_binary, std::string( what ) + " binary '" + program + "' not found or not executable" );
  }
  return exe;
}

inline process_result run_tool( std::vector<std::string> const& argv, tool_config const& cfg, std::filesystem::path const& dir,
                                char const* what )
{
  auto r = run_process( argv, cfg.timeout, dir );
  if ( r.spawn_failed )
  {
    throw tool_error( tool_error_kind::missing_binary, std::string( what ) + " could not be started", r.output );
  }
  if ( r.timed_out )
  {
    throw tool_error( tool_error_kind::timeout, std::string( what ) + " timed out", r.output );
  }
  if ( r.exit_code != 0 )
  {
    throw tool_error( tool_error_kind::nonzero_exit, std::string( what ) + " exited with status " + std::to_string( r.exit_code ), r.output );
  }
  return r;
}

inline aig_graph read_tool_aig( std::filesystem::path const& path, std::string const& output, char const* what )
{
  if ( !std::filesystem::exists( path ) )
  {
    throw tool_error( tool_error_kind::unparseable_output, std::string( what ) + " produced no AIG at " + path.string(), output );
  }
  try
  {
    return read_aiger_file( path );
  }
  catch ( std::exception const& e )
  {
    throw tool_error( tool_error_kind::unparseable_output, std::string( what ) + " wrote an unreadable AIG: " + e.what(), output );
  }
}

} // namespace detail

struct synthesis_result
{
  aig_graph graph;
  std::size_t gate_count{ 0 };          /* AND nodes of the final AIG */
  std::size_t node_count{ 0 };          /* all nodes, NOT nodes included */
  std::size_t reported_gate_count{ 0 }; /* as printed by the tool */
  std::vector<aig_graph> intermediates; /* after each step, when requested */
  std::string provenance;
  std::string tool_output;
};

/*!
  \brief Runs ABC on `design`: strash, the sequence, print_stats, write_aiger.

  The design is rewritten as binary AIGER into `run_dir` first, so ABC reads
  the same bytes regardless of the source format.
*/
inline synthesis_result run_external_synthesis( aig_graph const& design, opt_sequence const& seq, tool_config const& cfg,
                                                std::filesystem::path const& run_dir, bool store_intermediate = false )
{
  const auto exe = detail::require_tool( cfg.abc, "ABC" );
  std::filesystem::create_directories( run_dir );
  const auto dir = std::filesystem::absolute( run_dir );
  write_file_atomic( dir / "input.aig", write_aiger( design, aiger_format::binary ) );
  std::string script = "read " + ( dir / "input.aig" ).string() + "\nstrash\n";
  for ( std::size_t k = 0; k < seq.steps.size(); ++k )
  {
    script += seq.steps[k] + "\n";
    if ( store_intermediate )
    {
      char name[32];
      std::snprintf( name, sizeof( name ), "step_%02zu.aig", k );
      script += "write_aiger " + ( dir / name ).string() + "\n";
    }
  }
  script += "print_stats\nwrite_aiger " + ( dir / "output.aig" ).string() + "\n";
  write_file_atomic( dir / "synth.abc", script );
  std::filesystem::remove( dir / "output.aig" );

  const auto r = detail::run_tool( { exe.string(), "-f", ( dir / "synth.abc" ).string() }, cfg, dir, "ABC" );
  synthesis_result res;
  res.tool_output = r.output;
  res.provenance = "abc:" + exe.string();
  static const std::regex and_re( R"(and\s*=\s*(\d+))" );
  std::string last;
  for ( auto it = std::sregex_iterator( r.output.begin(), r.output.end(), and_re ); it != std::sregex_iterator(); ++it )
  {
    last = ( *it )[1];
  }
  if ( last.empty() )
  {
    throw tool_error( tool_error_kind::unparseable_output, "ABC output has no 'and = N' statistics", r.output );
  }
  res.reported_gate_count = std::stoull( last );
  res.graph = detail::read_tool_aig( dir / "output.aig", r.output, "ABC" );
  res.graph.name = design.name;
  if ( store_intermediate )
  {
    for ( std::size_t k = 0; k < seq.steps.size(); ++k )
    {
      char name[32];
      std::snprintf( name, sizeof( name ), "step_%02zu.aig", k );
      res.intermediates.push_back( detail::read_tool_aig( dir / name, r.output, "ABC" ) );
    }
  }
  res.gate_count = res.graph.num_ands();
  res.node_count = res.graph.size();
  return res;
}

/*! \brief Synthesizes one Verilog file to an AIG with yosys. */
inline aig_graph run_yosys_frontend( std::filesystem::path const& verilog, tool_config const& cfg, std::filesystem::path const& run_dir )
{
  const auto exe = detail::require_tool( cfg.yosys, "yosys" );
  std::filesystem::create_directories( run_dir );
  const auto dir = std::filesystem::absolute( run_dir );
  const auto out = dir / "design.aag";
  std::filesystem::remove( out );
  const std::string script = "read_verilog " + std::filesystem::absolute( verilog ).string() +
                             "\nhierarchy -auto-top\nsynth -flatten\naigmap\nopt_clean\nwrite_aiger -ascii -symbols " + out.string() + "\n";
  write_file_atomic( dir / "frontend.ys", script );
  const auto r = detail::run_tool( { exe.string(), "-q", "-s", ( dir / "frontend.ys" ).string() }, cfg, dir, "yosys" );
  auto g = detail::read_tool_aig( out, r.output, "yosys" );
  g.name = verilog.stem().string();
  return g;
}

} // namespace mgvga
