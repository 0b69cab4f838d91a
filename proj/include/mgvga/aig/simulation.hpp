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
  \file simulation.hpp
  \brief Bit-parallel simulation, truth tables and equivalence checking

  Assignment `a` sets PI `i` to bit `i` of `a` (PI 0 least significant).
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "aig_graph.hpp"
#include "../util/random.hpp"

namespace mgvga
{

inline constexpr std::uint32_t max_exhaustive_inputs = 16;

class capacity_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct simulation_mode
{
  enum class kind
  {
    exhaustive,
    sampled
  };
  kind type{ kind::exhaustive };
  std::uint64_t samples{ 0 };
  std::uint64_t seed{ 0 };

  static simulation_mode exhaustive() { return {}; }
  static simulation_mode sampled( std::uint64_t k, std::uint64_t seed ) { return { kind::sampled, k, seed }; }
};

using sim_words = std::vector<std::uint64_t>;

/*!
  \brief Simulates every node on `W` words of patterns.

  `pi_patterns[i]` holds the pattern words of `g.pis[i]`; all must share the
  same length. Constant nodes are filled with their pinned value.
*/
inline std::vector<sim_words> simulate_nodes( aig_graph const& g, std::vector<sim_words> const& pi_patterns,
                                             std::size_t num_words = 0 )
{
  if ( pi_patterns.size() != g.pis.size() )
  {
    throw graph_error( "simulate_nodes: expected one pattern per PI" );
  }
  if ( g.has_masked() )
  {
    throw graph_error( "simulate_nodes: graph contains MASKED nodes" );
  }
  const auto order = topological_order( g );
  if ( !order )
  {
    throw graph_error( "simulate_nodes: graph contains a cycle" );
  }
  const std::size_t words = pi_patterns.empty() ? std::max<std::size_t>( num_words, 1 ) : pi_patterns.front().size();
  adjacency adj( g );
  std::vector<sim_words> value( g.size() );
  for ( std::size_t i = 0; i < g.pis.size(); ++i )
  {
    if ( pi_patterns[i].size() != words )
    {
      throw graph_error( "simulate_nodes: pattern lengths differ" );
    }
    value[g.pis[i]] = pi_patterns[i];
  }
  for ( auto const& [c, v] : g.constants )
  {
    value[c].assign( words, v ? ~0ull : 0ull );
  }
  for ( auto v : *order )
  {
    const auto fi = adj.fanins( v );
    switch ( g.types[v] )
    {
    case node_type::pi:
      if ( value[v].empty() )
      {
        throw graph_error( "simulate_nodes: PI node " + std::to_string( v ) + " is neither an input nor a constant" );
      }
      break;
    case node_type::po:
      value[v] = value[fi[0].node];
      break;
    case node_type::not_gate:
      value[v].resize( words );
      for ( std::size_t w = 0; w < words; ++w )
      {
        value[v][w] = ~value[fi[0].node][w];
      }
      break;
    case node_type::and_gate:
      if ( fi.size() == 1 )
      {
        value[v] = value[fi[0].node];
      }
      else
      {
        value[v].resize( words );
        for ( std::size_t w = 0; w < words; ++w )
        {
          value[v][w] = value[fi[0].node][w] & value[fi[1].node][w];
        }
      }
      break;
    case node_type::masked:
      break;
    }
  }
  return value;
}

/*! \brief Patterns enumerating all 2^n assignments in index order. */
inline std::vector<sim_words> exhaustive_patterns( std::uint32_t num_inputs )
{
  if ( num_inputs > max_exhaustive_inputs )
  {
    throw capacity_error( "exhaustive simulation supports at most 16 PIs (got " + std::to_string( num_inputs ) +
                          "); use sampled mode instead" );
  }
  const std::uint64_t n = 1ull << num_inputs;
  const std::size_t words = static_cast<std::size_t>( ( n + 63 ) / 64 );
  std::vector<sim_words> pats( num_inputs, sim_words( words, 0 ) );
  for ( std::uint32_t i = 0; i < num_inputs; ++i )
  {
    for ( std::uint64_t a = 0; a < n; ++a )
    {
      if ( ( a >> i ) & 1 )
      {
        pats[i][a / 64] |= 1ull << ( a % 64 );
      }
    }
  }
  return pats;
}

struct truth_table
{
  std::uint32_t num_inputs{ 0 };
  std::uint32_t num_outputs{ 0 };
  std::uint64_t num_assignments{ 0 };
  /*! \brief One bit vector per PO, bit `a` is the value under assignment `a`. */
  std::vector<sim_words> outputs;
  /*! \brief Sampled mode only: row-major `num_assignments x num_inputs` input bits. */
  std::vector<std::uint8_t> assignments;
  bool sampled{ false };

  bool exhaustive() const { return !sampled; }

  bool bit( std::size_t po, std::uint64_t a ) const { return ( outputs[po][a / 64] >> ( a % 64 ) ) & 1; }

  /*! \brief Total stored bits, num_POs x assignments. */
  std::uint64_t bit_count() const { return num_assignments * num_outputs; }

  bool operator==( truth_table const& ) const = default;
};

namespace detail
{

inline void mask_tail( sim_words& w, std::uint64_t n )
{
  if ( n % 64 != 0 && !w.empty() )
  {
    w.back() &= ( 1ull << ( n % 64 ) ) - 1;
  }
}

inline std::vector<sim_words> sampled_patterns( std::uint32_t num_inputs, std::uint64_t k, std::uint64_t seed,
                                                std::vector<std::uint8_t>& assignments )
{
  const std::size_t words = static_cast<std::size_t>( ( k + 63 ) / 64 );
  std::vector<sim_words> pats( num_inputs, sim_words( words, 0 ) );
  assignments.assign( static_cast<std::size_t>( k * num_inputs ), 0 );
  rng r( seed );
  for ( std::uint64_t s = 0; s < k; ++s )
  {
    for ( std::uint32_t i = 0; i < num_inputs; ++i )
    {
      const bool b = r.next() & 1;
      assignments[s * num_inputs + i] = b;
      if ( b )
      {
        pats[i][s / 64] |= 1ull << ( s % 64 );
      }
    }
  }
  return pats;
}

} // namespace detail

/*! \brief Evaluates all PO functions under the given mode. */
inline truth_table truth_table_of( aig_graph const& g, simulation_mode const& mode = simulation_mode::exhaustive() )
{
  truth_table tt;
  tt.num_inputs = static_cast<std::uint32_t>( g.pis.size() );
  tt.num_outputs = static_cast<std::uint32_t>( g.pos.size() );
  std::vector<sim_words> pats;
  if ( mode.type == simulation_mode::kind::exhaustive )
  {
    pats = exhaustive_patterns( tt.num_inputs );
    tt.num_assignments = 1ull << tt.num_inputs;
  }
  else
  {
    pats = detail::sampled_patterns( tt.num_inputs, mode.samples, mode.seed, tt.assignments );
    tt.num_assignments = mode.samples;
    tt.sampled = true;
  }
  const auto values = simulate_nodes( g, pats, static_cast<std::size_t>( ( tt.num_assignments + 63 ) / 64 ) );
  for ( auto po : g.pos )
  {
    auto w = values[po];
    if ( w.empty() )
    {
      w.assign( 1, 0 );
    }
    w.resize( static_cast<std::size_t>( ( tt.num_assignments + 63 ) / 64 ) );
    detail::mask_tail( w, tt.num_assignments );
    tt.outputs.push_back( std::move( w ) );
  }
  return tt;
}

enum class equivalence_verdict
{
  equivalent,
  inequivalent,
  unknown
};

struct equivalence_result
{
  equivalence_verdict verdict{ equivalence_verdict::unknown };
  /*! \brief Distinguishing input bits by PI index (of the first graph). */
  std::vector<bool> witness;
  std::size_t failing_output{ 0 };

  /*! \brief Witness written most-significant PI first, e.g. "01" for PI0 = 1, PI1 = 0. */
  std::string witness_string() const
  {
    std::string s;
    for ( auto it = witness.rbegin(); it != witness.rend(); ++it )
    {
      s.push_back( *it ? '1' : '0' );
    }
    return s;
  }
};

enum class terminal_matching
{
  positional,
  by_name
};

namespace detail
{

/*! \brief Reorders the terminals of `g2` to line up with `g1` by name. */
inline aig_graph align_terminals( aig_graph const& g1, aig_graph const& g2 )
{
  auto align = []( std::vector<node_id> const& ids, std::vector<std::string> const& names_ref,
                   std::vector<std::string> const& names, char const* what ) {
    if ( names_ref.size() != ids.size() || names.size() != ids.size() )
    {
      throw graph_error( std::string( "name matching requires named " ) + what );
    }
    std::unordered_map<std::string, node_id> by_name;
    for ( std::size_t i = 0; i < ids.size(); ++i )
    {
      if ( !by_name.emplace( names[i], ids[i] ).second )
      {
        throw graph_error( std::string( "duplicate " ) + what + " name '" + names[i] + "'" );
      }
    }
    std::vector<node_id> out;
    for ( auto const& n : names_ref )
    {
      const auto it = by_name.find( n );
      if ( it == by_name.end() )
      {
        throw graph_error( std::string( "no " ) + what + " named '" + n + "'" );
      }
      out.push_back( it->second );
    }
    return out;
  };
  aig_graph h = g2;
  h.pis = align( g2.pis, g1.pi_names, g2.pi_names, "PIs" );
  h.pos = align( g2.pos, g1.po_names, g2.po_names, "POs" );
  h.pi_names = g1.pi_names;
  h.po_names = g1.po_names;
  return h;
}

} // namespace detail

/*!
  \brief Functional equivalence of two graphs.

  Exhaustive mode is complete up to 16 PIs. Sampled mode can only refute:
  agreement on every sample yields `unknown`.
*/
inline equivalence_result equivalent( aig_graph const& g1, aig_graph const& g2,
                                      simulation_mode const& mode = simulation_mode::exhaustive(),
                                      terminal_matching matching = terminal_matching::positional )
{
  if ( g1.pis.size() != g2.pis.size() || g1.pos.size() != g2.pos.size() )
  {
    throw graph_error( "equivalent: PI/PO arity mismatch (" + std::to_string( g1.pis.size() ) + "/" +
                       std::to_string( g1.pos.size() ) + " vs " + std::to_string( g2.pis.size() ) + "/" +
                       std::to_string( g2.pos.size() ) + ")" );
  }
  const aig_graph aligned = matching == terminal_matching::by_name ? detail::align_terminals( g1, g2 ) : aig_graph{};
  aig_graph const& h2 = matching == terminal_matching::by_name ? aligned : g2;

  const auto t1 = truth_table_of( g1, mode );
  const auto t2 = truth_table_of( h2, mode );
  equivalence_result res;
  const auto n = t1.num_inputs;
  std::optional<std::uint64_t> first;
  for ( std::size_t o = 0; o < t1.outputs.size(); ++o )
  {
    for ( std::size_t w = 0; w < t1.outputs[o].size(); ++w )
    {
      const auto diff = t1.outputs[o][w] ^ t2.outputs[o][w];
      if ( diff )
      {
        const auto a = w * 64 + static_cast<std::uint64_t>( __builtin_ctzll( diff ) );
        if ( !first || a < *first )
        {
          first = a;
          res.failing_output = o;
        }
        break;
      }
    }
  }
  if ( !first )
  {
    res.verdict = mode.type == simulation_mode::kind::exhaustive ? equivalence_verdict::equivalent : equivalence_verdict::unknown;
    return res;
  }
  res.verdict = equivalence_verdict::inequivalent;
  res.witness.resize( n );
  for ( std::uint32_t i = 0; i < n; ++i )
  {
    res.witness[i] = mode.type == simulation_mode::kind::exhaustive ? ( ( *first >> i ) & 1 ) != 0
                                                                    : t1.assignments[*first * n + i] != 0;
  }
  return res;
}

} // namespace mgvga
