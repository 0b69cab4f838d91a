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
  \file model.hpp
  \brief Graph encoder/decoder, masking, cross-attention and prediction heads

  Each message-passing layer computes

      h' = LayerNorm(h + relu(h W_self + P_in h W_in + P_out h W_out + b))

  where P_in / P_out aggregate over fan-in / fan-out neighbors. Messages
  follow physical edges (one per edge), while degree labels count edge
  multiplicity, so a buffer AND looks single-input to the network but must
  still be reconstructed with in-degree 2.
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "../aig/aig_graph.hpp"
#include "../diff/ops.hpp"
#include "../util/random.hpp"

namespace mgvga
{

/*! \brief Per-graph constant inputs of the network. */
template<class T>
struct graph_tensors
{
  std::size_t num_nodes{ 0 };
  /*! \brief Input vocabulary index per node (MASKED allowed). */
  std::vector<std::uint32_t> types;
  std::shared_ptr<sparse_matrix<T> const> in_op;
  std::shared_ptr<sparse_matrix<T> const> out_op;
};

template<class T>
graph_tensors<T> make_graph_tensors( aig_graph const& g, aggregation agg )
{
  graph_tensors<T> gt;
  const auto n = static_cast<Eigen::Index>( g.size() );
  gt.num_nodes = g.size();
  gt.types.reserve( g.size() );
  for ( auto t : g.types )
  {
    gt.types.push_back( static_cast<std::uint32_t>( t ) );
  }
  adjacency adj( g );
  std::vector<Eigen::Triplet<T>> tin, tout;
  for ( Eigen::Index v = 0; v < n; ++v )
  {
    const auto fi = adj.fanins( static_cast<node_id>( v ) );
    const auto fo = adj.fanouts( static_cast<node_id>( v ) );
    const T win = agg == aggregation::mean && !fi.empty() ? T( 1 ) / static_cast<T>( fi.size() ) : T( 1 );
    const T wout = agg == aggregation::mean && !fo.empty() ? T( 1 ) / static_cast<T>( fo.size() ) : T( 1 );
    for ( auto const& f : fi )
    {
      tin.emplace_back( v, static_cast<Eigen::Index>( f.node ), win );
    }
    for ( auto const& f : fo )
    {
      tout.emplace_back( v, static_cast<Eigen::Index>( f.node ), wout );
    }
  }
  auto sin = std::make_shared<sparse_matrix<T>>( n, n );
  auto sout = std::make_shared<sparse_matrix<T>>( n, n );
  sin->setFromTriplets( tin.begin(), tin.end() );
  sout->setFromTriplets( tout.begin(), tout.end() );
  gt.in_op = std::move( sin );
  gt.out_op = std::move( sout );
  return gt;
}

/*! \brief Ground-truth reconstruction targets: class labels and (in, out) degrees. */
template<class T>
struct graph_labels
{
  std::vector<std::uint32_t> types;
  matrix<T> degrees; /* N x 2 */
};

template<class T>
graph_labels<T> make_labels( aig_graph const& g )
{
  if ( g.has_masked() )
  {
    throw graph_error( "labels require a graph without MASKED nodes" );
  }
  graph_labels<T> l;
  const auto d = degrees( g );
  l.degrees.resize( static_cast<Eigen::Index>( g.size() ), 2 );
  for ( std::size_t v = 0; v < g.size(); ++v )
  {
    l.types.push_back( static_cast<std::uint32_t>( g.types[v] ) );
    l.degrees( static_cast<Eigen::Index>( v ), 0 ) = static_cast<T>( d.in[v] );
    l.degrees( static_cast<Eigen::Index>( v ), 1 ) = static_cast<T>( d.out[v] );
  }
  return l;
}

/*!
  \brief Creates all model tensors.

  Weight matrices and embeddings are uniform in [-1/sqrt(d), 1/sqrt(d)],
  biases start at zero, layer-norm gains at one and the mask token at zero.
*/
template<class T>
parameter_set<T> init_model( model_config const& cfg, std::uint64_t seed )
{
  cfg.validate();
  const auto d = static_cast<Eigen::Index>( cfg.d );
  const auto dv = static_cast<Eigen::Index>( cfg.d_v );
  const double bound = 1.0 / std::sqrt( static_cast<double>( cfg.d ) );
  rng r( seed );
  parameter_set<T> ps;
  auto uniform = [&]( std::string const& name, Eigen::Index rows, Eigen::Index cols ) {
    auto& p = ps.add( name, rows, cols );
    for ( Eigen::Index i = 0; i < p.value.size(); ++i )
    {
      p.value.data()[i] = static_cast<T>( r.uniform( -bound, bound ) );
    }
  };
  auto constant = [&]( std::string const& name, Eigen::Index rows, Eigen::Index cols, T v ) {
    ps.add( name, rows, cols ).value.setConstant( v );
  };
  uniform( "type_embedding", static_cast<Eigen::Index>( num_node_types ), d );
  auto layers = [&]( std::string const& stack, std::uint32_t count ) {
    for ( std::uint32_t i = 0; i < count; ++i )
    {
      const auto p = stack + "." + std::to_string( i ) + ".";
      uniform( p + "w_self", d, d );
      uniform( p + "w_in", d, d );
      uniform( p + "w_out", d, d );
      constant( p + "bias", 1, d, T( 0 ) );
      constant( p + "ln_gain", 1, d, T( 1 ) );
      constant( p + "ln_bias", 1, d, T( 0 ) );
    }
  };
  layers( "encoder", cfg.encoder_layers );
  layers( "decoder", cfg.decoder_layers );
  constant( "mask_token", 1, d, T( 0 ) );
  uniform( "attention.w_q", d, d );
  uniform( "attention.w_k", dv, d );
  uniform( "attention.w_v", dv, d );
  uniform( "head.type.weight", d, static_cast<Eigen::Index>( num_gate_classes ) );
  constant( "head.type.bias", 1, static_cast<Eigen::Index>( num_gate_classes ), T( 0 ) );
  uniform( "head.in.weight", d, 1 );
  constant( "head.in.bias", 1, 1, T( 0 ) );
  uniform( "head.out.weight", d, 1 );
  constant( "head.out.bias", 1, 1, T( 0 ) );
  return ps;
}

/*! \brief Parameters excluding the cross-attention projections. */
template<class T>
std::size_t graph_model_parameter_count( parameter_set<T> const& ps )
{
  std::size_t n = 0;
  for ( std::size_t i = 0; i < ps.size(); ++i )
  {
    if ( ps[i].name.rfind( "attention.", 0 ) != 0 )
    {
      n += ps[i].numel();
    }
  }
  return n;
}

namespace detail
{

template<class T>
var<T> message_layer( tape<T>& t, parameter_set<T>& ps, std::string const& prefix, var<T> h, graph_tensors<T> const& g )
{
  auto w = [&]( char const* name ) { return t.param( ps.get( prefix + name ) ); };
  auto z = matmul( h, w( "w_self" ) );
  z = add( z, matmul( propagate( h, g.in_op ), w( "w_in" ) ) );
  z = add( z, matmul( propagate( h, g.out_op ), w( "w_out" ) ) );
  z = add( z, w( "bias" ) );
  return layer_norm( add( h, relu( z ) ), w( "ln_gain" ), w( "ln_bias" ) );
}

template<class T>
std::uint32_t count_layers( parameter_set<T> const& ps, std::string const& stack )
{
  std::uint32_t n = 0;
  while ( ps.find( stack + "." + std::to_string( n ) + ".w_self" ) )
  {
    ++n;
  }
  return n;
}

} // namespace detail

/*! \brief X = g_E(V, A): type embeddings followed by the encoder stack. */
template<class T>
var<T> encode( tape<T>& t, parameter_set<T>& ps, graph_tensors<T> const& g )
{
  auto h = gather_rows( t.param( ps.get( "type_embedding" ) ), g.types );
  const auto layers = detail::count_layers( ps, "encoder" );
  for ( std::uint32_t i = 0; i < layers; ++i )
  {
    h = detail::message_layer( t, ps, "encoder." + std::to_string( i ) + ".", h, g );
  }
  return h;
}

/*! \brief X~ = g_D(X, A) over the same, unmasked adjacency. */
template<class T>
var<T> decode( tape<T>& t, parameter_set<T>& ps, var<T> x, graph_tensors<T> const& g )
{
  if ( static_cast<std::size_t>( x.rows() ) != g.num_nodes )
  {
    throw shape_error( "decode: " + std::to_string( x.rows() ) + " embedding rows for a graph with " +
                       std::to_string( g.num_nodes ) + " nodes" );
  }
  const auto layers = detail::count_layers( ps, "decoder" );
  auto h = x;
  for ( std::uint32_t i = 0; i < layers; ++i )
  {
    h = detail::message_layer( t, ps, "decoder." + std::to_string( i ) + ".", h, g );
  }
  return h;
}

struct mask_selection
{
  std::vector<std::uint32_t> kept;   /* sorted */
  std::vector<std::uint32_t> masked; /* sorted */
  double ratio{ 0.0 };
  std::uint64_t seed{ 0 };

  std::size_t num_masked() const { return masked.size(); }
};

/*! \brief ceil(r * N), robust to representation error in r. */
inline std::size_t num_to_mask( double ratio, std::size_t n )
{
  const auto m = static_cast<std::size_t>( std::ceil( ratio * static_cast<double>( n ) - 1e-9 ) );
  return std::min( m, n );
}

/*! \brief Uniform sample of ceil(r N) nodes without replacement. */
inline mask_selection select_mask( std::size_t n, double ratio, std::uint64_t seed )
{
  if ( !( ratio >= 0.0 && ratio < 1.0 ) )
  {
    throw std::invalid_argument( "mask ratio must lie in [0, 1)" );
  }
  mask_selection sel;
  sel.ratio = ratio;
  sel.seed = seed;
  rng r( seed );
  sel.masked = r.sample_without_replacement( static_cast<std::uint32_t>( n ), static_cast<std::uint32_t>( num_to_mask( ratio, n ) ) );
  std::sort( sel.masked.begin(), sel.masked.end() );
  std::vector<char> is_masked( n, 0 );
  for ( auto v : sel.masked )
  {
    is_masked[v] = 1;
  }
  for ( std::uint32_t v = 0; v < n; ++v )
  {
    if ( !is_masked[v] )
    {
      sel.kept.push_back( v );
    }
  }
  return sel;
}

/*! \brief Replaces ceil(r N) encoded rows with the learnable mask token. */
template<class T>
std::pair<var<T>, mask_selection> mask_latent( tape<T>& t, parameter_set<T>& ps, var<T> x, double ratio, std::uint64_t seed )
{
  auto sel = select_mask( static_cast<std::size_t>( x.rows() ), ratio, seed );
  auto out = replace_rows( x, sel.masked, t.param( ps.get( "mask_token" ) ) );
  return { out, std::move( sel ) };
}

/*! \brief Copy of `g` with ceil(r N) node types replaced by MASKED; edges untouched. */
inline std::pair<aig_graph, mask_selection> mask_types( aig_graph const& g, double ratio, std::uint64_t seed )
{
  if ( g.has_masked() )
  {
    throw graph_error( "mask_types: graph is already masked" );
  }
  auto sel = select_mask( g.size(), ratio, seed );
  aig_graph out = g;
  for ( auto v : sel.masked )
  {
    out.types[v] = node_type::masked;
  }
  return { std::move( out ), std::move( sel ) };
}

template<class T>
struct attention_result
{
  var<T> output;
  var<T> weights; /* N x M, row-stochastic */
};

/*! \brief X' = softmax(Q K^T / sqrt(d)) V with Q = X W_Q, K = X_V W_K, V = X_V W_V. */
template<class T>
attention_result<T> cross_attention( tape<T>& t, parameter_set<T>& ps, var<T> x, matrix<T> const& xv )
{
  auto& wk = ps.get( "attention.w_k" );
  if ( xv.rows() < 1 )
  {
    throw shape_error( "cross_attention: Verilog representation has no rows" );
  }
  if ( xv.cols() != wk.value.rows() )
  {
    throw shape_error( "cross_attention: X_V has d_v = " + std::to_string( xv.cols() ) + " but W_K expects " +
                       std::to_string( wk.value.rows() ) );
  }
  const auto d = static_cast<T>( ps.get( "attention.w_q" ).value.cols() );
  auto kv = t.constant( xv );
  auto q = matmul( x, t.param( ps.get( "attention.w_q" ) ) );
  auto k = matmul( kv, t.param( wk ) );
  auto v = matmul( kv, t.param( ps.get( "attention.w_v" ) ) );
  auto scores = scale( matmul( q, transpose( k ) ), T( 1 ) / std::sqrt( d ) );
  auto w = row_softmax( scores );
  return { matmul( w, v ), w };
}

/*! \brief Z~ = softmax(X~ W + b), one distribution over {PI, PO, AND, NOT} per node. */
template<class T>
var<T> predict_types( tape<T>& t, parameter_set<T>& ps, var<T> x )
{
  auto logits = add( matmul( x, t.param( ps.get( "head.type.weight" ) ) ), t.param( ps.get( "head.type.bias" ) ) );
  return row_softmax( logits );
}

/*! \brief N x 2 matrix of predicted (in-degree, out-degree). */
template<class T>
var<T> predict_degrees( tape<T>& t, parameter_set<T>& ps, var<T> x )
{
  auto din = add( matmul( x, t.param( ps.get( "head.in.weight" ) ) ), t.param( ps.get( "head.in.bias" ) ) );
  auto dout = add( matmul( x, t.param( ps.get( "head.out.weight" ) ) ), t.param( ps.get( "head.out.bias" ) ) );
  return concat_cols( din, dout );
}

/*! \brief Order-independent fingerprint of the edge multiset (for no-mutation assertions). */
inline std::uint64_t adjacency_fingerprint( aig_graph const& g )
{
  std::uint64_t h = splitmix64( g.size() );
  std::uint64_t acc = 0;
  for ( auto const& e : g.edges )
  {
    acc += splitmix64( ( static_cast<std::uint64_t>( e.src ) << 33 ) ^ ( static_cast<std::uint64_t>( e.dst ) << 2 ) ^ e.multiplicity );
  }
  return splitmix64( h ^ acc ^ g.edges.size() );
}

} // namespace mgvga
