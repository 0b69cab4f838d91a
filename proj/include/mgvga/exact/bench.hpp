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
  \file bench.hpp
  \brief Unconstrained vs fence-guided search over a family of targets
*/

#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthesis.hpp"

namespace mgvga
{

struct bench_row
{
  std::uint32_t target{ 0 };
  std::uint32_t representative{ 0 };
  exact_result unconstrained;
  exact_result guided;
  search_bounds bounds;
};

struct bench_report
{
  std::uint32_t num_inputs{ 3 };
  std::vector<bench_row> rows;

  std::size_t size_mismatches() const
  {
    return std::count_if( rows.begin(), rows.end(), []( auto const& r ) { return r.guided.size() != r.unconstrained.size(); } );
  }
  std::size_t guided_not_worse() const
  {
    return std::count_if( rows.begin(), rows.end(),
                          []( auto const& r ) { return r.guided.stats.fences_explored <= r.unconstrained.stats.fences_explored; } );
  }
  std::size_t guided_strictly_fewer() const
  {
    return std::count_if( rows.begin(), rows.end(),
                          []( auto const& r ) { return r.guided.stats.fences_explored < r.unconstrained.stats.fences_explored; } );
  }
  std::size_t fallbacks() const
  {
    return std::count_if( rows.begin(), rows.end(), []( auto const& r ) { return r.guided.stats.fallback; } );
  }

  /*! \brief One row per target and mode: target, mode, fences_explored, candidates, micros, size, levels. */
  std::string to_csv() const
  {
    std::ostringstream os;
    os << "target,mode,fences_explored,candidates,micros,size,levels,class,bound_nodes,bound_levels,fallback\n";
    for ( auto const& r : rows )
    {
      for ( auto const* res : { &r.unconstrained, &r.guided } )
      {
        const bool g = res == &r.guided;
        os << "0x" << tt_to_hex( r.target, num_inputs ) << ',' << ( g ? "guided" : "unconstrained" ) << ',' << res->stats.fences_explored
           << ',' << res->stats.candidates << ',' << res->stats.micros << ',' << res->size() << ',' << res->levels() << ",0x"
           << tt_to_hex( r.representative, num_inputs ) << ',' << ( g ? r.bounds.nodes : 0 ) << ',' << ( g ? r.bounds.levels : 0 ) << ','
           << ( res->stats.fallback ? 1 : 0 ) << '\n';
      }
    }
    return os.str();
  }

  nlohmann::json summary() const
  {
    std::uint64_t fu = 0, fg = 0, cu = 0, cg = 0, mu = 0, mg = 0;
    for ( auto const& r : rows )
    {
      fu += r.unconstrained.stats.fences_explored;
      fg += r.guided.stats.fences_explored;
      cu += r.unconstrained.stats.candidates;
      cg += r.guided.stats.candidates;
      mu += r.unconstrained.stats.micros;
      mg += r.guided.stats.micros;
    }
    return { { "targets", rows.size() },
             { "size_mismatches", size_mismatches() },
             { "guided_not_worse", guided_not_worse() },
             { "guided_strictly_fewer", guided_strictly_fewer() },
             { "fallbacks", fallbacks() },
             { "fences_unconstrained", fu },
             { "fences_guided", fg },
             { "candidates_unconstrained", cu },
             { "candidates_guided", cg },
             { "micros_unconstrained", mu },
             { "micros_guided", mg } };
  }
};

/*!
  \brief Runs both searches for every target.

  `bounds_for` receives the target and its unconstrained result; it returns
  the bounds for the guided run (for example the exact labels, or a
  predictor's output with slack).
*/
inline bench_report run_exact_bench( std::vector<std::uint32_t> const& targets, std::uint32_t num_inputs,
                                     std::function<search_bounds( std::uint32_t, exact_result const& )> const& bounds_for,
                                     std::uint32_t max_nodes = default_max_exact_nodes )
{
  bench_report rep;
  rep.num_inputs = num_inputs;
  for ( auto t : targets )
  {
    bench_row row;
    row.target = t;
    row.unconstrained = exact_synthesize( t, num_inputs, max_nodes );
    if ( !row.unconstrained.feasible )
    {
      throw exact_error( "no circuit with at most " + std::to_string( max_nodes ) + " nodes for 0x" + tt_to_hex( t, num_inputs ) );
    }
    row.representative = row.unconstrained.representative;
    row.bounds = bounds_for( t, row.unconstrained );
    row.guided = fence_guided_search( t, num_inputs, row.bounds, max_nodes );
    rep.rows.push_back( std::move( row ) );
  }
  return rep;
}

/*! \brief The exact labels of the unconstrained optimum. */
inline search_bounds exact_bounds( std::uint32_t, exact_result const& r ) { return { r.size(), r.levels() }; }

} // namespace mgvga
