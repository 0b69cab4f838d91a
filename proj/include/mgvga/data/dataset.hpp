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
  \file dataset.hpp
  \brief QoR dataset builder, Verilog-AIG pairing and the JSONL manifest

  Layout under the output directory:
    designs/<id>.aag              normalized copy of every design
    aigs/<id>/seq_<k>/step_XX.aag per-step AIGs (when intermediates are stored)
    runs/<id>/seq_<k>/            tool scripts and scratch files (external tools)
    pairs/<stem>.aag              AIG of each paired Verilog file
    manifest.jsonl                one JSON record per line
    labels.csv                    design,sequence_id,gate_count,node_count
  All paths stored in the manifest are relative to the output directory.
*/

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sequences.hpp"
#include "tools.hpp"
#include "toy_rewrite.hpp"
#include "verilog_frontend.hpp"
#include "../aig/simulation.hpp"

namespace mgvga
{

struct design_record
{
  std::string id;
  std::string path; /* relative */
  std::string sha256;
  std::string split; /* train | eval */
  bool ok{ true };
  std::string error;
};

struct label_record
{
  std::string design;
  std::uint32_t sequence_id{ 0 };
  bool ok{ true };
  std::size_t gate_count{ 0 };
  std::size_t node_count{ 0 };
  std::string provenance;
  std::vector<std::string> intermediates; /* relative */
  std::string error;
};

struct pair_record
{
  std::string verilog; /* as given */
  std::string aig;     /* relative */
  std::string verilog_sha256;
  std::string aig_sha256;
  bool ok{ true };
  std::string error;
};

struct dataset_manifest
{
  std::vector<design_record> designs;
  std::vector<opt_sequence> sequences;
  std::vector<label_record> labels;
  std::vector<pair_record> pairs;

  std::string to_jsonl() const
  {
    std::string out;
    auto line = [&]( nlohmann::json const& j ) { out += j.dump() + "\n"; };
    for ( auto const& d : designs )
    {
      nlohmann::json j = { { "type", "design" }, { "id", d.id }, { "path", d.path }, { "sha256", d.sha256 }, { "split", d.split }, { "ok", d.ok } };
      if ( !d.ok )
      {
        j["error"] = d.error;
      }
      line( j );
    }
    for ( auto const& s : sequences )
    {
      line( { { "type", "sequence" }, { "id", s.id }, { "steps", s.steps } } );
    }
    for ( auto const& l : labels )
    {
      nlohmann::json j = { { "type", "label" },       { "design", l.design },         { "sequence_id", l.sequence_id },
                           { "ok", l.ok },            { "gate_count", l.gate_count }, { "node_count", l.node_count },
                           { "provenance", l.provenance }, { "intermediates", l.intermediates } };
      if ( !l.ok )
      {
        j["error"] = l.error;
      }
      line( j );
    }
    for ( auto const& p : pairs )
    {
      nlohmann::json j = { { "type", "pair" },       { "verilog", p.verilog },   { "aig", p.aig },
                           { "verilog_sha256", p.verilog_sha256 }, { "aig_sha256", p.aig_sha256 }, { "ok", p.ok } };
      if ( !p.ok )
      {
        j["error"] = p.error;
      }
      line( j );
    }
    return out;
  }

  static dataset_manifest from_jsonl( std::string_view text )
  {
    dataset_manifest m;
    std::istringstream is{ std::string( text ) };
    std::string ln;
    std::size_t lineno = 0;
    while ( std::getline( is, ln ) )
    {
      ++lineno;
      if ( ln.empty() )
      {
        continue;
      }
      const auto j = nlohmann::json::parse( ln, nullptr, false );
      if ( j.is_discarded() || !j.contains( "type" ) )
      {
        throw std::runtime_error( "manifest line " + std::to_string( lineno ) + " is not a typed JSON record" );
      }
      const auto type = j["type"].get<std::string>();
      if ( type == "design" )
      {
        m.designs.push_back( { j.at( "id" ), j.at( "path" ), j.at( "sha256" ), j.at( "split" ), j.at( "ok" ), j.value( "error", "" ) } );
      }
      else if ( type == "sequence" )
      {
        m.sequences.push_back( { j.at( "id" ).get<std::uint32_t>(), j.at( "steps" ).get<std::vector<std::string>>() } );
      }
      else if ( type == "label" )
      {
        m.labels.push_back( { j.at( "design" ), j.at( "sequence_id" ), j.at( "ok" ), j.at( "gate_count" ), j.at( "node_count" ),
                              j.at( "provenance" ), j.at( "intermediates" ).get<std::vector<std::string>>(), j.value( "error", "" ) } );
      }
      else if ( type == "pair" )
      {
        m.pairs.push_back( { j.at( "verilog" ), j.at( "aig" ), j.at( "verilog_sha256" ), j.at( "aig_sha256" ), j.at( "ok" ), j.value( "error", "" ) } );
      }
      else
      {
        throw std::runtime_error( "manifest line " + std::to_string( lineno ) + " has unknown type '" + type + "'" );
      }
    }
    return m;
  }

  std::string labels_csv() const
  {
    std::string out = "design,sequence_id,gate_count,node_count\n";
    for ( auto const& l : labels )
    {
      if ( l.ok )
      {
        out += l.design + "," + std::to_string( l.sequence_id ) + "," + std::to_string( l.gate_count ) + "," + std::to_string( l.node_count ) + "\n";
      }
    }
    return out;
  }

  design_record const* find_design( std::string const& id ) const
  {
    for ( auto const& d : designs )
    {
      if ( d.id == id )
      {
        return &d;
      }
    }
    return nullptr;
  }
};

inline void write_manifest( std::filesystem::path const& out_dir, dataset_manifest const& m )
{
  write_file_atomic( out_dir / "manifest.jsonl", m.to_jsonl() );
  write_file_atomic( out_dir / "labels.csv", m.labels_csv() );
}

inline dataset_manifest load_manifest( std::filesystem::path const& path )
{
  return dataset_manifest::from_jsonl( read_file( path ) );
}

/*! \brief Referential-integrity problems: missing files and train/eval overlap. Empty when sound. */
inline std::vector<std::string> check_manifest( dataset_manifest const& m, std::filesystem::path const& root )
{
  std::vector<std::string> problems;
  auto need = [&]( std::string const& rel ) {
    if ( !rel.empty() && !std::filesystem::exists( root / rel ) )
    {
      problems.push_back( "missing file " + rel );
    }
  };
  std::vector<std::string> train, eval;
  for ( auto const& d : m.designs )
  {
    if ( d.ok )
    {
      need( d.path );
    }
    ( d.split == "eval" ? eval : train ).push_back( d.id );
  }
  std::sort( train.begin(), train.end() );
  std::sort( eval.begin(), eval.end() );
  std::vector<std::string> both;
  std::set_intersection( train.begin(), train.end(), eval.begin(), eval.end(), std::back_inserter( both ) );
  for ( auto const& id : both )
  {
    problems.push_back( "design " + id + " is in both splits" );
  }
  for ( auto const& l : m.labels )
  {
    if ( !m.find_design( l.design ) )
    {
      problems.push_back( "label refers to unknown design " + l.design );
    }
    for ( auto const& p : l.intermediates )
    {
      need( p );
    }
  }
  for ( auto const& p : m.pairs )
  {
    if ( p.ok )
    {
      need( p.aig );
    }
  }
  return problems;
}

struct dataset_options
{
  bool store_intermediate{ false };
  std::size_t jobs{ 1 };
  double eval_fraction{ 0.2 };
  std::uint64_t seed{ 0 };
  /*! \brief Check every produced AIG against its design (exhaustive up to 16 inputs, else 10k samples). */
  bool verify{ true };
};

namespace detail
{

inline std::string step_name( std::size_t k )
{
  char buf[32];
  std::snprintf( buf, sizeof( buf ), "step_%02zu.aag", k );
  return buf;
}

inline simulation_mode oracle_mode( aig_graph const& g, std::uint64_t seed )
{
  return g.pis.size() <= max_exhaustive_inputs ? simulation_mode::exhaustive() : simulation_mode::sampled( 10000, seed );
}

/*! \brief Runs `fn(i)` for i in [0, n) on up to `jobs` threads. */
template<class Fn>
void parallel_for( std::size_t n, std::size_t jobs, Fn&& fn )
{
  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for ( auto i = next++; i < n; i = next++ )
    {
      fn( i );
    }
  };
  const auto k = std::max<std::size_t>( 1, std::min( jobs, n ) );
  if ( k == 1 )
  {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for ( std::size_t t = 0; t < k; ++t )
  {
    pool.emplace_back( worker );
  }
  for ( auto& t : pool )
  {
    t.join();
  }
}

} // namespace detail

/*!
  \brief Labels every (design, sequence) pair with its optimized gate count.

  Uses ABC when `tools.abc` is set and the toy transforms otherwise. Failures
  become rows with `ok = false`; the manifest is written either way.
*/
inline dataset_manifest build_dataset( std::vector<std::filesystem::path> const& design_paths, std::vector<opt_sequence> const& sequences,
                                       tool_config const& tools, std::filesystem::path const& out_dir, dataset_options const& opts = {} )
{
  namespace fs = std::filesystem;
  fs::create_directories( out_dir );
  dataset_manifest m;
  m.sequences = sequences;

  std::vector<std::optional<aig_graph>> graphs;
  for ( auto const& p : design_paths )
  {
    design_record d;
    d.id = p.stem().string();
    if ( m.find_design( d.id ) )
    {
      throw std::invalid_argument( "duplicate design id '" + d.id + "'" );
    }
    try
    {
      auto g = read_aiger_file( p );
      g.name = d.id;
      const auto bytes = write_aiger( g, aiger_format::ascii );
      d.path = "designs/" + d.id + ".aag";
      write_file_atomic( out_dir / d.path, bytes );
      d.sha256 = sha256_hex( bytes );
      graphs.emplace_back( std::move( g ) );
    }
    catch ( std::exception const& e )
    {
      d.ok = false;
      d.error = e.what();
      graphs.emplace_back();
    }
    m.designs.push_back( std::move( d ) );
  }

  // seeded split over the sorted ids, so input order does not matter
  std::vector<std::size_t> idx( m.designs.size() );
  for ( std::size_t i = 0; i < idx.size(); ++i )
  {
    idx[i] = i;
  }
  std::sort( idx.begin(), idx.end(), [&]( auto a, auto b ) { return m.designs[a].id < m.designs[b].id; } );
  rng split_rng( derive_seed( opts.seed, 0x5b11 ) );
  split_rng.shuffle( idx.begin(), idx.end() );
  const auto n_eval = static_cast<std::size_t>( std::ceil( opts.eval_fraction * static_cast<double>( idx.size() ) - 1e-9 ) );
  for ( std::size_t k = 0; k < idx.size(); ++k )
  {
    m.designs[idx[k]].split = k < n_eval ? "eval" : "train";
  }

  struct task
  {
    std::size_t design;
    std::size_t sequence;
  };
  std::vector<task> tasks;
  for ( std::size_t d = 0; d < graphs.size(); ++d )
  {
    if ( graphs[d] )
    {
      for ( std::size_t s = 0; s < sequences.size(); ++s )
      {
        tasks.push_back( { d, s } );
      }
    }
  }
  std::vector<label_record> rows( tasks.size() );
  detail::parallel_for( tasks.size(), opts.jobs, [&]( std::size_t t ) {
    auto const& [di, si] = tasks[t];
    auto const& g = *graphs[di];
    auto const& seq = sequences[si];
    auto& row = rows[t];
    row.design = m.designs[di].id;
    row.sequence_id = seq.id;
    const auto rel = fs::path( "aigs" ) / row.design / ( "seq_" + std::to_string( seq.id ) );
    try
    {
      std::vector<aig_graph> steps;
      aig_graph final_graph;
      if ( tools.abc.empty() )
      {
        row.provenance = "toy";
        final_graph = toy_synthesize( g, seq, derive_seed( opts.seed, di, seq.id ), [&]( std::size_t, aig_graph const& step ) {
          if ( opts.store_intermediate )
          {
            steps.push_back( step );
          }
        } );
      }
      else
      {
        const auto run_dir = out_dir / "runs" / row.design / ( "seq_" + std::to_string( seq.id ) );
        auto r = run_external_synthesis( g, seq, tools, run_dir, opts.store_intermediate );
        row.provenance = r.provenance;
        final_graph = std::move( r.graph );
        steps = std::move( r.intermediates );
      }
      if ( opts.verify )
      {
        const auto mode = detail::oracle_mode( g, derive_seed( opts.seed, 0xe9, di, seq.id ) );
        auto check = [&]( aig_graph const& x ) {
          const auto v = equivalent( g, x, mode );
          if ( v.verdict == equivalence_verdict::inequivalent )
          {
            throw std::runtime_error( "optimized AIG is not equivalent to the design (witness " + v.witness_string() + ")" );
          }
        };
        check( final_graph );
        for ( auto const& s : steps )
        {
          check( s );
        }
      }
      for ( std::size_t k = 0; k < steps.size(); ++k )
      {
        const auto p = ( rel / detail::step_name( k ) ).generic_string();
        write_file_atomic( out_dir / p, write_aiger( steps[k], aiger_format::ascii ) );
        row.intermediates.push_back( p );
      }
      row.gate_count = final_graph.num_ands();
      row.node_count = final_graph.size();
    }
    catch ( tool_error const& e )
    {
      row.ok = false;
      row.error = to_string( e.kind() ) + ": " + e.what();
    }
    catch ( std::exception const& e )
    {
      row.ok = false;
      row.error = e.what();
    }
  } );
  m.labels = std::move( rows );
  write_manifest( out_dir, m );
  return m;
}

/*!
  \brief Synthesizes every `*.v` file under `corpus_dir` (sorted by name) to `out_dir/pairs/`.

  Uses yosys when `tools.yosys` is set and the built-in front-end otherwise.
  Files that fail are kept as rows with `ok = false`.
*/
inline std::vector<pair_record> pair_verilog_aig( std::filesystem::path const& corpus_dir, tool_config const& tools,
                                                  std::filesystem::path const& out_dir, std::size_t jobs = 1 )
{
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for ( auto const& e : fs::directory_iterator( corpus_dir ) )
  {
    if ( e.is_regular_file() && e.path().extension() == ".v" )
    {
      files.push_back( e.path() );
    }
  }
  std::sort( files.begin(), files.end() );
  fs::create_directories( out_dir / "pairs" );
  std::vector<pair_record> rows( files.size() );
  detail::parallel_for( files.size(), jobs, [&]( std::size_t i ) {
    auto& row = rows[i];
    row.verilog = files[i].string();
    try
    {
      const auto src = read_file( files[i] );
      row.verilog_sha256 = sha256_hex( src );
      auto g = tools.yosys.empty() ? elaborate_verilog( src ) : run_yosys_frontend( files[i], tools, out_dir / "runs" / "pairs" / files[i].stem() );
      g.name = files[i].stem().string();
      const auto bytes = write_aiger( g, aiger_format::ascii );
      row.aig = "pairs/" + files[i].stem().string() + ".aag";
      write_file_atomic( out_dir / row.aig, bytes );
      row.aig_sha256 = sha256_hex( bytes );
    }
    catch ( std::exception const& e )
    {
      row.ok = false;
      row.error = e.what();
      row.aig.clear();
    }
  } );
  return rows;
}

} // namespace mgvga
