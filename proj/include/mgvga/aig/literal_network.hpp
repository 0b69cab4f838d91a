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
  \file literal_network.hpp
  \brief AIGER-style network with complemented literals

  Variable 0 is constant false, variables 1..I are inputs and the rest are
  AND gates whose fan-ins always refer to smaller variables. Conversion to
  `aig_graph` materializes one NOT node per distinct complemented literal;
  conversion back folds NOT nodes into complement bits (a NOT chain of
  length two collapses to the plain literal).
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "aig_graph.hpp"

namespace mgvga
{

using literal = std::uint32_t;

inline constexpr literal literal_false = 0;
inline constexpr literal literal_true = 1;

inline constexpr literal make_literal( std::uint32_t var, bool complemented = false )
{
  return ( var << 1 ) | static_cast<literal>( complemented );
}
inline constexpr std::uint32_t literal_var( literal l ) { return l >> 1; }
inline constexpr bool literal_complemented( literal l ) { return ( l & 1u ) != 0; }
inline constexpr literal literal_negate( literal l ) { return l ^ 1u; }

class literal_network
{
public:
  struct and_def
  {
    literal a;
    literal b;
  };

  literal create_pi( std::string name = {} )
  {
    if ( !ands_.empty() )
    {
      throw graph_error( "literal_network: inputs must be created before AND gates" );
    }
    pi_names_.push_back( std::move( name ) );
    return make_literal( static_cast<std::uint32_t>( pi_names_.size() ) );
  }

  /*! \brief Appends an AND gate verbatim (no simplification). */
  literal create_and( literal a, literal b )
  {
    check_literal( a );
    check_literal( b );
    ands_.push_back( { a, b } );
    return make_literal( static_cast<std::uint32_t>( num_vars() - 1 ) );
  }

  /*! \brief AND with constant folding, idempotence and structural hashing. */
  literal create_and_hashed( literal a, literal b )
  {
    if ( a > b )
    {
      std::swap( a, b );
    }
    if ( a == literal_false )
    {
      return literal_false;
    }
    if ( a == literal_true )
    {
      return b;
    }
    if ( a == b )
    {
      return a;
    }
    if ( a == literal_negate( b ) )
    {
      return literal_false;
    }
    const auto key = ( static_cast<std::uint64_t>( a ) << 32 ) | b;
    if ( const auto it = strash_.find( key ); it != strash_.end() )
    {
      return it->second;
    }
    const auto l = create_and( a, b );
    strash_.emplace( key, l );
    return l;
  }

  literal create_or( literal a, literal b ) { return literal_negate( create_and_hashed( literal_negate( a ), literal_negate( b ) ) ); }

  literal create_xor( literal a, literal b )
  {
    const auto x = create_and_hashed( a, literal_negate( b ) );
    const auto y = create_and_hashed( literal_negate( a ), b );
    return create_or( x, y );
  }

  void create_po( literal l, std::string name = {} )
  {
    check_literal( l );
    outputs_.push_back( l );
    po_names_.push_back( std::move( name ) );
  }

  std::size_t num_pis() const { return pi_names_.size(); }
  std::size_t num_ands() const { return ands_.size(); }
  std::size_t num_pos() const { return outputs_.size(); }
  /*! \brief Constant + inputs + ANDs (the AIGER M + 1). */
  std::size_t num_vars() const { return 1 + pi_names_.size() + ands_.size(); }

  bool is_pi_var( std::uint32_t v ) const { return v >= 1 && v <= pi_names_.size(); }
  bool is_and_var( std::uint32_t v ) const { return v > pi_names_.size() && v < num_vars(); }

  and_def const& and_of_var( std::uint32_t v ) const { return ands_[v - 1 - pi_names_.size()]; }

  std::vector<and_def> const& ands() const { return ands_; }
  std::vector<literal> const& outputs() const { return outputs_; }
  std::vector<std::string> const& pi_names() const { return pi_names_; }
  std::vector<std::string> const& po_names() const { return po_names_; }

  void set_output( std::size_t i, literal l )
  {
    check_literal( l );
    outputs_.at( i ) = l;
  }

  /*! \brief Expands complemented literals into NOT nodes. */
  aig_graph to_graph( std::string name = {} ) const
  {
    aig_graph g;
    g.name = std::move( name );
    std::vector<node_id> plain( num_vars(), invalid );
    std::vector<node_id> inverted( num_vars(), invalid );

    const bool named_pis = std::any_of( pi_names_.begin(), pi_names_.end(), []( auto const& s ) { return !s.empty(); } );
    const bool named_pos = std::any_of( po_names_.begin(), po_names_.end(), []( auto const& s ) { return !s.empty(); } );
    for ( std::size_t i = 0; i < pi_names_.size(); ++i )
    {
      plain[i + 1] = g.add_node( node_type::pi );
      g.pis.push_back( plain[i + 1] );
    }
    if ( named_pis )
    {
      g.pi_names = pi_names_;
    }

    auto node_of = [&]( literal l ) -> node_id {
      const auto v = literal_var( l );
      if ( plain[v] == invalid )
      {
        // only the constant can be materialized lazily
        plain[v] = g.add_node( node_type::pi );
        g.constants.emplace_back( plain[v], false );
      }
      if ( !literal_complemented( l ) )
      {
        return plain[v];
      }
      if ( inverted[v] == invalid )
      {
        inverted[v] = g.add_node( node_type::not_gate );
        g.add_edge( plain[v], inverted[v] );
      }
      return inverted[v];
    };

    for ( std::size_t k = 0; k < ands_.size(); ++k )
    {
      const auto [a, b] = ands_[k];
      const auto na = node_of( a );
      const auto nb = node_of( b );
      const auto v = static_cast<std::uint32_t>( 1 + pi_names_.size() + k );
      plain[v] = g.add_node( node_type::and_gate );
      if ( na == nb )
      {
        g.add_edge( na, plain[v], 2 );
      }
      else
      {
        g.add_edge( na, plain[v] );
        g.add_edge( nb, plain[v] );
      }
    }
    for ( std::size_t i = 0; i < outputs_.size(); ++i )
    {
      const auto driver = node_of( outputs_[i] );
      const auto po = g.add_node( node_type::po );
      g.add_edge( driver, po );
      g.pos.push_back( po );
    }
    if ( named_pos )
    {
      g.po_names = po_names_;
    }
    return g;
  }

private:
  static constexpr node_id invalid = ~node_id{ 0 };

  void check_literal( literal l ) const
  {
    if ( literal_var( l ) >= num_vars() )
    {
      throw graph_error( "literal_network: literal " + std::to_string( l ) + " refers to an undefined variable" );
    }
  }

  std::vector<std::string> pi_names_;
  std::vector<and_def> ands_;
  std::vector<literal> outputs_;
  std::vector<std::string> po_names_;
  std::unordered_map<std::uint64_t, literal> strash_;
};

/*!
  \brief Folds NOT nodes into complemented literals.

  Inputs come first (in `pis` order), then AND gates in topological order.
  Throws on MASKED nodes, cycles or invalid terminal lists.
*/
inline literal_network network_from_graph( aig_graph const& g )
{
  if ( g.has_masked() )
  {
    throw graph_error( "graph contains MASKED nodes" );
  }
  const auto order = topological_order( g );
  if ( !order )
  {
    throw graph_error( "graph contains a cycle" );
  }
  adjacency adj( g );
  constexpr literal unset = ~literal{ 0 };
  std::vector<literal> lit( g.size(), unset );

  literal_network net;
  for ( std::size_t i = 0; i < g.pis.size(); ++i )
  {
    lit[g.pis[i]] = net.create_pi( i < g.pi_names.size() ? g.pi_names[i] : std::string() );
  }
  for ( auto const& [id, value] : g.constants )
  {
    lit[id] = value ? literal_true : literal_false;
  }

  auto fanin_literal = [&]( node_id v, std::size_t k ) {
    const auto fi = adj.fanins( v );
    if ( fi.empty() )
    {
      throw graph_error( "node " + std::to_string( v ) + " has no fan-in" );
    }
    const auto& ref = fi.size() == 1 ? fi[0] : fi[k];
    if ( lit[ref.node] == unset )
    {
      throw graph_error( "fan-in of node " + std::to_string( v ) + " has no driver" );
    }
    return lit[ref.node];
  };

  std::vector<node_id> po_order;
  for ( auto v : *order )
  {
    switch ( g.types[v] )
    {
    case node_type::pi:
      if ( lit[v] == unset )
      {
        throw graph_error( "PI node " + std::to_string( v ) + " is not listed as an input or constant" );
      }
      break;
    case node_type::not_gate:
      lit[v] = literal_negate( fanin_literal( v, 0 ) );
      break;
    case node_type::and_gate:
    {
      const auto fi = adj.fanins( v );
      if ( !( fi.size() == 2 || ( fi.size() == 1 && fi[0].multiplicity == 2 ) ) )
      {
        throw graph_error( "AND node " + std::to_string( v ) + " does not have two inputs" );
      }
      lit[v] = net.create_and( fanin_literal( v, 0 ), fanin_literal( v, 1 ) );
      break;
    }
    case node_type::po:
      lit[v] = fanin_literal( v, 0 );
      break;
    case node_type::masked:
      break;
    }
  }
  for ( std::size_t i = 0; i < g.pos.size(); ++i )
  {
    net.create_po( lit[g.pos[i]], i < g.po_names.size() ? g.po_names[i] : std::string() );
  }
  return net;
}

} // namespace mgvga
