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
  \file equivalence.hpp
  \brief Equivalent / inequivalent cone pairs and embedding-similarity scoring

  A positive pair is the cone of a gate next to an optimized, buffer-augmented
  copy of the same cone. A negative pair puts the cone of one gate next to the
  optimized copy of another cone with the same number of inputs but a
  different truth table. Both labels are checked exhaustively.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metrics.hpp"
#include "qor.hpp"
#include "../aig/augment.hpp"
#include "../aig/cone.hpp"
#include "../aig/simulation.hpp"
#include "../data/sequences.hpp"
#include "../data/tools.hpp"
#include "../data/toy_rewrite.hpp"

namespace mgvga
{

struct equiv_pair
{
  aig_graph first;
  aig_graph second;
  bool equivalent{ false };
  std::string origin; /* "<design>:<node>" for each side */
};

struct equiv_pair_options
{
  std::size_t min_cone_gates{ 4 };
  std::size_t sequence_length{ 4 };
  double buffer_p{ 0.1 };
  double positive_fraction{ 0.5 };
};

struct equiv_pair_set
{
  std::vector<equiv_pair> pairs;
  std::size_t skipped_capacity{ 0 }; /* cones with more PIs than the exhaustive oracle accepts */
  std::size_t positives{ 0 };
  std::size_t negatives{ 0 };
};

/*! \brief Turns a graph into a functionally equivalent, differently structured one. */
using cone_optimizer = std::function<aig_graph( aig_graph const&, opt_sequence const&, std::uint64_t )>;

inline cone_optimizer toy_optimizer()
{
  return []( aig_graph const& g, opt_sequence const& s, std::uint64_t seed ) { return toy_synthesize( g, s, seed ); };
}

/*! \brief Runs each optimization through ABC in its own directory below `work_dir`. */
inline cone_optimizer abc_optimizer( tool_config const& tools, std::filesystem::path const& work_dir )
{
  return [tools, work_dir]( aig_graph const& g, opt_sequence const& s, std::uint64_t seed ) {
    const auto dir = work_dir / ( "cone_" + std::to_string( seed ) );
    return run_external_synthesis( g, s, tools, dir, false ).graph;
  };
}

namespace detail
{

struct cone_candidate
{
  std::size_t design;
  node_id root;
  aig_graph graph;
  truth_table table;
};

} // namespace detail

/*!
  \brief Samples `n_pairs` labelled pairs; the same seed gives the same list.

  Throws `eval_error` when the designs do not hold enough usable cones.
*/
inline equiv_pair_set build_equiv_pairs( std::vector<aig_graph> const& designs, std::size_t n_pairs, std::uint64_t seed,
                                         cone_optimizer const& optimize = toy_optimizer(),
                                         equiv_pair_options const& opts = {} )
{
  equiv_pair_set out;
  std::vector<detail::cone_candidate> cands;
  std::map<std::size_t, std::vector<std::size_t>> by_inputs;
  for ( std::size_t d = 0; d < designs.size(); ++d )
  {
    auto const& g = designs[d];
    for ( node_id v = 0; v < g.size(); ++v )
    {
      if ( g.types[v] != node_type::and_gate )
      {
        continue;
      }
      auto c = extract_cone( g, v );
      if ( c.extracted.count( node_type::and_gate ) < opts.min_cone_gates )
      {
        continue;
      }
      if ( c.extracted.pis.size() > max_exhaustive_inputs )
      {
        ++out.skipped_capacity;
        continue;
      }
      auto tt = truth_table_of( c.extracted );
      by_inputs[c.extracted.pis.size()].push_back( cands.size() );
      cands.push_back( { d, v, std::move( c.extracted ), std::move( tt ) } );
    }
  }
  if ( cands.size() < 2 )
  {
    throw eval_error( "build_equiv_pairs: fewer than two usable cones" );
  }

  const auto n_pos = static_cast<std::size_t>( std::llround( opts.positive_fraction * static_cast<double>( n_pairs ) ) );
  const auto seqs = sample_sequences( n_pairs, opts.sequence_length, derive_seed( seed, 1 ) );
  rng r( derive_seed( seed, 2 ) );
  auto name = [&]( detail::cone_candidate const& c ) { return designs[c.design].name + ":" + std::to_string( c.root ); };
  auto variant = [&]( detail::cone_candidate const& c, std::size_t i ) {
    auto opt = optimize( c.graph, seqs[i], derive_seed( seed, 3, i ) );
    return opts.buffer_p > 0.0 ? insert_buffers( opt, opts.buffer_p, derive_seed( seed, 4, i ) ) : opt;
  };

  const std::size_t max_attempts = 1000;
  for ( std::size_t i = 0; i < n_pairs; ++i )
  {
    const bool positive = i < n_pos;
    bool made = false;
    for ( std::size_t attempt = 0; attempt < max_attempts && !made; ++attempt )
    {
      auto const& a = cands[r.below( cands.size() )];
      if ( positive )
      {
        auto v = variant( a, i );
        if ( equivalent( a.graph, v ).verdict != equivalence_verdict::equivalent )
        {
          throw eval_error( "optimized cone " + name( a ) + " is not equivalent to the original" );
        }
        out.pairs.push_back( { a.graph, std::move( v ), true, name( a ) + " " + name( a ) } );
        made = true;
        continue;
      }
      auto const& pool = by_inputs[a.graph.pis.size()];
      auto const& b = cands[pool[r.below( pool.size() )]];
      if ( b.table.outputs == a.table.outputs )
      {
        continue;
      }
      auto v = variant( b, i );
      if ( equivalent( a.graph, v ).verdict != equivalence_verdict::inequivalent )
      {
        continue;
      }
      out.pairs.push_back( { a.graph, std::move( v ), false, name( a ) + " " + name( b ) } );
      made = true;
    }
    if ( !made )
    {
      throw eval_error( "build_equiv_pairs: could not find an inequivalent partner after " + std::to_string( max_attempts ) + " attempts" );
    }
    ++( positive ? out.positives : out.negatives );
  }
  return out;
}

/*! \brief Cosine similarity of the pooled embeddings. */
inline cosine_result equivalence_score( aig_graph const& g1, aig_graph const& g2, parameter_set<float>& ps, model_config const& cfg,
                                        graph_pooling pooling = graph_pooling::mean )
{
  return cosine_similarity( graph_embedding( ps, cfg, g1, pooling ), graph_embedding( ps, cfg, g2, pooling ) );
}

struct equiv_report
{
  std::vector<double> scores;
  std::vector<bool> labels;
  std::size_t zero_vectors{ 0 };
  roc_result roc;

  std::string to_csv() const
  {
    std::ostringstream os;
    os.precision( 17 );
    os << "pair,label,score,predicted\n";
    for ( std::size_t i = 0; i < scores.size(); ++i )
    {
      os << i << ',' << ( labels[i] ? 1 : 0 ) << ',' << scores[i] << ',' << ( scores[i] >= roc.threshold ? 1 : 0 ) << '\n';
    }
    return os.str();
  }

  nlohmann::json to_json() const
  {
    auto const& c = roc.at_threshold;
    return { { "pairs", scores.size() },
             { "threshold", roc.threshold },
             { "Precision", c.precision() },
             { "Recall", c.recall() },
             { "F1-score", c.f1() },
             { "AUC", roc.auc },
             { "tp", c.tp },
             { "fp", c.fp },
             { "tn", c.tn },
             { "fn", c.fn },
             { "zero_vectors", zero_vectors } };
  }
};

inline equiv_report evaluate_equivalence( std::vector<equiv_pair> const& pairs, parameter_set<float>& ps, model_config const& cfg,
                                          graph_pooling pooling = graph_pooling::mean )
{
  equiv_report rep;
  for ( auto const& p : pairs )
  {
    const auto s = equivalence_score( p.first, p.second, ps, cfg, pooling );
    rep.zero_vectors += s.zero_vector ? 1 : 0;
    rep.scores.push_back( s.value );
    rep.labels.push_back( p.equivalent );
  }
  rep.roc = roc_and_threshold( rep.scores, rep.labels );
  return rep;
}

} // namespace mgvga
