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
  \file aig_graph.hpp
  \brief Node-typed And-Inverter graph

  Inverters are explicit NOT nodes rather than complemented edges, so the
  graph uses the four-type vocabulary {PI, PO, AND, NOT}. A fifth type,
  MASKED, exists only in graphs produced by type masking.

  An AND whose two inputs are the same signal is stored as a single edge of
  multiplicity 2. Its in-degree is 2.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mgvga
{

using node_id = std::uint32_t;

enum class node_type : std::uint8_t
{
  pi = 0,
  po = 1,
  and_gate = 2,
  not_gate = 3,
  masked = 4
};

/*! \brief Number of real gate classes predicted by the type head. */
inline constexpr std::size_t num_gate_classes = 4;
/*! \brief Input vocabulary size of the type embedding (includes MASKED). */
inline constexpr std::size_t num_node_types = 5;

inline std::string_view to_string( node_type t )
{
  switch ( t )
  {
  case node_type::pi:
    return "PI";
  case node_type::po:
    return "PO";
  case node_type::and_gate:
    return "AND";
  case node_type::not_gate:
    return "NOT";
  case node_type::masked:
    return "MASKED";
  }
  return "?";
}

inline std::optional<node_type> node_type_from_string( std::string_view s )
{
  for ( auto t : { node_type::pi, node_type::po, node_type::and_gate, node_type::not_gate, node_type::masked } )
  {
    if ( to_string( t ) == s )
    {
      return t;
    }
  }
  return std::nullopt;
}

struct edge
{
  node_id src{ 0 };
  node_id dst{ 0 };
  std::uint8_t multiplicity{ 1 };

  bool operator==( edge const& ) const = default;
};

class graph_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct aig_graph
{
  std::string name;
  std::vector<node_type> types;
  std::vector<edge> edges;
  /*! PI node ids in input order; index 0 is the least significant assignment bit. */
  std::vector<node_id> pis;
  /*! PO node ids in output order. */
  std::vector<node_id> pos;
  /*! Optional symbol names, either empty or parallel to `pis` / `pos`. */
  std::vector<std::string> pi_names;
  std::vector<std::string> po_names;
  /*! PI-typed nodes pinned to a constant (AIGER literals 0/1); not listed in `pis`. */
  std::vector<std::pair<node_id, bool>> constants;

  std::size_t size() const { return types.size(); }
  bool empty() const { return types.empty(); }

  node_id add_node( node_type t )
  {
    types.push_back( t );
    return static_cast<node_id>( types.size() - 1 );
  }

  node_id add_pi( std::string name_hint = {} )
  {
    const auto id = add_node( node_type::pi );
    pis.push_back( id );
    if ( !name_hint.empty() || !pi_names.empty() )
    {
      pi_names.resize( pis.size() - 1 );
      pi_names.push_back( std::move( name_hint ) );
    }
    return id;
  }

  node_id add_po( node_id driver, std::string name_hint = {} )
  {
    const auto id = add_node( node_type::po );
    add_edge( driver, id );
    pos.push_back( id );
    if ( !name_hint.empty() || !po_names.empty() )
    {
      po_names.resize( pos.size() - 1 );
      po_names.push_back( std::move( name_hint ) );
    }
    return id;
  }

  void add_edge( node_id src, node_id dst, std::uint8_t multiplicity = 1 )
  {
    edges.push_back( { src, dst, multiplicity } );
  }

  std::optional<bool> constant_value( node_id n ) const
  {
    for ( auto const& [id, value] : constants )
    {
      if ( id == n )
      {
        return value;
      }
    }
    return std::nullopt;
  }

  std::size_t count( node_type t ) const
  {
    return static_cast<std::size_t>( std::count( types.begin(), types.end(), t ) );
  }

  /*! \brief AIG size metric: number of AND nodes. */
  std::size_t num_ands() const { return count( node_type::and_gate ); }

  bool has_masked() const { return count( node_type::masked ) != 0; }

  bool operator==( aig_graph const& ) const = default;
};

struct fanin_ref
{
  node_id node;
  std::uint8_t multiplicity;
};

/*! \brief CSR fan-in / fan-out view of a graph. Edges with out-of-range endpoints are skipped. */
class adjacency
{
public:
  explicit adjacency( aig_graph const& g ) : n_( g.size() )
  {
    in_offsets_.assign( n_ + 1, 0 );
    out_offsets_.assign( n_ + 1, 0 );
    for ( auto const& e : g.edges )
    {
      if ( e.src < n_ && e.dst < n_ )
      {
        ++in_offsets_[e.dst + 1];
        ++out_offsets_[e.src + 1];
      }
    }
    for ( std::size_t i = 0; i < n_; ++i )
    {
      in_offsets_[i + 1] += in_offsets_[i];
      out_offsets_[i + 1] += out_offsets_[i];
    }
    in_.resize( in_offsets_[n_] );
    out_.resize( out_offsets_[n_] );
    auto in_fill = in_offsets_;
    auto out_fill = out_offsets_;
    for ( auto const& e : g.edges )
    {
      if ( e.src < n_ && e.dst < n_ )
      {
        in_[in_fill[e.dst]++] = { e.src, e.multiplicity };
        out_[out_fill[e.src]++] = { e.dst, e.multiplicity };
      }
    }
  }

  std::size_t size() const { return n_; }

  std::span<const fanin_ref> fanins( node_id n ) const
  {
    return { in_.data() + in_offsets_[n], in_offsets_[n + 1] - in_offsets_[n] };
  }

  std::span<const fanin_ref> fanouts( node_id n ) const
  {
    return { out_.data() + out_offsets_[n], out_offsets_[n + 1] - out_offsets_[n] };
  }

private:
  std::size_t n_;
  std::vector<std::size_t> in_offsets_, out_offsets_;
  std::vector<fanin_ref> in_, out_;
};

/*! \brief Kahn topological order (stable by node id); nullopt on a cycle. */
inline std::optional<std::vector<node_id>> topological_order( aig_graph const& g )
{
  adjacency adj( g );
  const auto n = g.size();
  std::vector<std::uint32_t> pending( n, 0 );
  for ( node_id v = 0; v < n; ++v )
  {
    pending[v] = static_cast<std::uint32_t>( adj.fanins( v ).size() );
  }
  // min-heap over ready ids keeps the order deterministic and id-stable
  std::vector<node_id> ready;
  for ( node_id v = 0; v < n; ++v )
  {
    if ( pending[v] == 0 )
    {
      ready.push_back( v );
    }
  }
  std::make_heap( ready.begin(), ready.end(), std::greater<>() );
  std::vector<node_id> order;
  order.reserve( n );
  while ( !ready.empty() )
  {
    std::pop_heap( ready.begin(), ready.end(), std::greater<>() );
    const auto v = ready.back();
    ready.pop_back();
    order.push_back( v );
    for ( auto const& f : adj.fanouts( v ) )
    {
      if ( --pending[f.node] == 0 )
      {
        ready.push_back( f.node );
        std::push_heap( ready.begin(), ready.end(), std::greater<>() );
      }
    }
  }
  if ( order.size() != n )
  {
    return std::nullopt;
  }
  return order;
}

struct degree_vectors
{
  std::vector<std::uint32_t> in;  /* D-, buffer inputs count twice */
  std::vector<std::uint32_t> out; /* D+ */
};

inline degree_vectors degrees( aig_graph const& g )
{
  degree_vectors d;
  d.in.assign( g.size(), 0 );
  d.out.assign( g.size(), 0 );
  for ( auto const& e : g.edges )
  {
    if ( e.src < g.size() && e.dst < g.size() )
    {
      d.in[e.dst] += e.multiplicity;
      d.out[e.src] += e.multiplicity;
    }
  }
  return d;
}

/* ------------------------------------------------------------------ */
/* validation                                                          */
/* ------------------------------------------------------------------ */

enum class violation_kind
{
  dangling_edge,
  cycle,
  degree,
  duplicate_edge,
  multiplicity,
  terminal_list
};

inline std::string_view to_string( violation_kind k )
{
  switch ( k )
  {
  case violation_kind::dangling_edge:
    return "dangling-edge";
  case violation_kind::cycle:
    return "cycle";
  case violation_kind::degree:
    return "degree";
  case violation_kind::duplicate_edge:
    return "duplicate-edge";
  case violation_kind::multiplicity:
    return "multiplicity";
  case violation_kind::terminal_list:
    return "terminal-list";
  }
  return "?";
}

struct violation
{
  violation_kind kind;
  std::optional<node_id> node;
  std::string message;
};

struct validation_report
{
  std::vector<violation> violations;

  bool ok() const { return violations.empty(); }

  std::size_t count( violation_kind k ) const
  {
    return static_cast<std::size_t>(
        std::count_if( violations.begin(), violations.end(), [k]( auto const& v ) { return v.kind == k; } ) );
  }
};

/*! \brief Lists every structural invariant violation; empty iff the graph is valid. */
inline validation_report validate( aig_graph const& g )
{
  validation_report r;
  auto add = [&r]( violation_kind k, std::optional<node_id> n, std::string msg ) {
    r.violations.push_back( { k, n, std::move( msg ) } );
  };
  const auto n = g.size();

  std::vector<std::pair<node_id, node_id>> seen;
  seen.reserve( g.edges.size() );
  for ( auto const& e : g.edges )
  {
    if ( e.src >= n || e.dst >= n )
    {
      add( violation_kind::dangling_edge, std::nullopt,
           "edge " + std::to_string( e.src ) + "->" + std::to_string( e.dst ) + " references a missing node" );
      continue;
    }
    if ( e.src == e.dst )
    {
      add( violation_kind::cycle, e.src, "self-loop on node " + std::to_string( e.src ) );
    }
    if ( e.multiplicity == 0 || e.multiplicity > 2 )
    {
      add( violation_kind::multiplicity, e.dst, "edge into node " + std::to_string( e.dst ) + " has multiplicity " + std::to_string( e.multiplicity ) );
    }
    else if ( e.multiplicity == 2 && g.types[e.dst] != node_type::and_gate && g.types[e.dst] != node_type::masked )
    {
      add( violation_kind::multiplicity, e.dst, "only AND nodes may take a doubled input (node " + std::to_string( e.dst ) + ")" );
    }
    seen.emplace_back( e.src, e.dst );
  }
  std::sort( seen.begin(), seen.end() );
  for ( std::size_t i = 1; i < seen.size(); ++i )
  {
    if ( seen[i] == seen[i - 1] )
    {
      add( violation_kind::duplicate_edge, seen[i].second,
           "duplicate edge " + std::to_string( seen[i].first ) + "->" + std::to_string( seen[i].second ) );
    }
  }

  const auto d = degrees( g );
  for ( node_id v = 0; v < n; ++v )
  {
    const auto name = std::string( to_string( g.types[v] ) ) + " node " + std::to_string( v );
    switch ( g.types[v] )
    {
    case node_type::pi:
      if ( d.in[v] != 0 )
      {
        add( violation_kind::degree, v, name + " has in-degree " + std::to_string( d.in[v] ) + ", expected 0" );
      }
      break;
    case node_type::po:
      if ( d.in[v] != 1 )
      {
        add( violation_kind::degree, v, name + " has in-degree " + std::to_string( d.in[v] ) + ", expected 1" );
      }
      if ( d.out[v] != 0 )
      {
        add( violation_kind::degree, v, name + " has out-degree " + std::to_string( d.out[v] ) + ", expected 0" );
      }
      break;
    case node_type::and_gate:
      if ( d.in[v] != 2 )
      {
        add( violation_kind::degree, v, name + " has in-degree " + std::to_string( d.in[v] ) + ", expected 2" );
      }
      break;
    case node_type::not_gate:
      if ( d.in[v] != 1 )
      {
        add( violation_kind::degree, v, name + " has in-degree " + std::to_string( d.in[v] ) + ", expected 1" );
      }
      break;
    case node_type::masked:
      break;
    }
  }

  if ( !topological_order( g ) )
  {
    add( violation_kind::cycle, std::nullopt, "graph contains a directed cycle" );
  }

  std::vector<std::uint8_t> listed( n, 0 );
  for ( auto p : g.pis )
  {
    if ( p >= n || g.types[p] != node_type::pi || listed[p]++ )
    {
      add( violation_kind::terminal_list, p < n ? std::optional<node_id>( p ) : std::nullopt, "bad PI list entry " + std::to_string( p ) );
    }
  }
  for ( auto const& [c, value] : g.constants )
  {
    if ( c >= n || g.types[c] != node_type::pi || listed[c]++ )
    {
      add( violation_kind::terminal_list, c < n ? std::optional<node_id>( c ) : std::nullopt, "bad constant entry " + std::to_string( c ) );
    }
  }
  for ( auto p : g.pos )
  {
    if ( p >= n || g.types[p] != node_type::po || listed[p]++ )
    {
      add( violation_kind::terminal_list, p < n ? std::optional<node_id>( p ) : std::nullopt, "bad PO list entry " + std::to_string( p ) );
    }
  }
  for ( node_id v = 0; v < n; ++v )
  {
    if ( ( g.types[v] == node_type::pi || g.types[v] == node_type::po ) && !listed[v] )
    {
      add( violation_kind::terminal_list, v, std::string( to_string( g.types[v] ) ) + " node " + std::to_string( v ) + " missing from terminal list" );
    }
  }
  if ( !g.pi_names.empty() && g.pi_names.size() != g.pis.size() )
  {
    add( violation_kind::terminal_list, std::nullopt, "PI name list length mismatch" );
  }
  if ( !g.po_names.empty() && g.po_names.size() != g.pos.size() )
  {
    add( violation_kind::terminal_list, std::nullopt, "PO name list length mismatch" );
  }
  return r;
}

/* ------------------------------------------------------------------ */
/* JSON dump                                                           */
/* ------------------------------------------------------------------ */

inline nlohmann::json to_json( aig_graph const& g )
{
  nlohmann::json j;
  j["name"] = g.name;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for ( node_id v = 0; v < g.size(); ++v )
  {
    nodes.push_back( { { "id", v }, { "type", to_string( g.types[v] ) } } );
  }
  auto& edges = j["edges"] = nlohmann::json::array();
  for ( auto const& e : g.edges )
  {
    edges.push_back( { { "src", e.src }, { "dst", e.dst }, { "multiplicity", e.multiplicity } } );
  }
  j["pis"] = g.pis;
  j["pos"] = g.pos;
  j["pi_names"] = g.pi_names;
  j["po_names"] = g.po_names;
  auto& consts = j["constants"] = nlohmann::json::array();
  for ( auto const& [id, value] : g.constants )
  {
    consts.push_back( { { "id", id }, { "value", value } } );
  }
  return j;
}

inline aig_graph graph_from_json( nlohmann::json const& j )
{
  aig_graph g;
  g.name = j.value( "name", std::string() );
  for ( auto const& n : j.at( "nodes" ) )
  {
    const auto t = node_type_from_string( n.at( "type" ).get<std::string>() );
    if ( !t || n.at( "id" ).get<node_id>() != g.size() )
    {
      throw graph_error( "malformed node entry in graph JSON" );
    }
    g.types.push_back( *t );
  }
  for ( auto const& e : j.at( "edges" ) )
  {
    g.add_edge( e.at( "src" ).get<node_id>(), e.at( "dst" ).get<node_id>(), e.value( "multiplicity", std::uint8_t{ 1 } ) );
  }
  g.pis = j.at( "pis" ).get<std::vector<node_id>>();
  g.pos = j.at( "pos" ).get<std::vector<node_id>>();
  g.pi_names = j.value( "pi_names", std::vector<std::string>() );
  g.po_names = j.value( "po_names", std::vector<std::string>() );
  if ( j.contains( "constants" ) )
  {
    for ( auto const& c : j.at( "constants" ) )
    {
      g.constants.emplace_back( c.at( "id" ).get<node_id>(), c.at( "value" ).get<bool>() );
    }
  }
  return g;
}

} // namespace mgvga
