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
  \file bounds.hpp
  \brief Node and level bounds predicted from encoder embeddings
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "synthesis.hpp"
#include "../eval/qor.hpp"

namespace mgvga
{

/*! \brief Unoptimized sum-of-minterms AIG of a truth table, the predictor's input graph. */
inline aig_graph function_graph( std::uint32_t tt, std::uint32_t num_inputs )
{
  detail::check_target( tt, num_inputs );
  literal_network net;
  std::vector<literal> x;
  for ( std::uint32_t i = 0; i < num_inputs; ++i )
  {
    x.push_back( net.create_pi( "x" + std::to_string( i ) ) );
  }
  std::optional<literal> sum;
  for ( std::uint32_t a = 0; a < ( 1u << num_inputs ); ++a )
  {
    if ( !( ( tt >> a ) & 1u ) )
    {
      continue;
    }
    literal m = x[0] ^ static_cast<literal>( !( a & 1u ) );
    for ( std::uint32_t i = 1; i < num_inputs; ++i )
    {
      m = net.create_and_hashed( m, x[i] ^ static_cast<literal>( !( ( a >> i ) & 1u ) ) );
    }
    sum = sum ? net.create_or( *sum, m ) : m;
  }
  net.create_po( *sum, "f" );
  return net.to_graph( "tt_" + tt_to_hex( tt, num_inputs ) );
}

struct bound_prediction
{
  std::uint32_t nodes{ 0 };
  std::uint32_t levels{ 0 };
  std::uint32_t slack_nodes{ 0 };
  std::uint32_t slack_levels{ 0 };

  search_bounds bounds() const { return { nodes + slack_nodes, levels + slack_levels }; }
};

/*! \brief Small label sets need longer full-batch training than the QoR default. */
inline mlp_config default_bound_mlp() { return { 128, 5000, 3e-3, 0.0, 0 }; }

struct bound_sample
{
  aig_graph graph;
  std::uint32_t nodes{ 0 };
  std::uint32_t levels{ 0 };
};

/*! \brief Two-output head on the pooled embedding, same perceptron as the QoR head. */
struct bound_head
{
  mlp_regressor mlp;
  graph_pooling pooling{ graph_pooling::mean };
};

/*!
  \brief Fits the head to (nodes - 0.5, levels - 0.5).

  Rounding a prediction up then recovers the label whenever the regression
  error stays below one half.
*/
inline bound_head train_bound_head( std::vector<bound_sample> const& samples, parameter_set<float>& ps, model_config const& cfg,
                                    mlp_config const& mc = default_bound_mlp(), graph_pooling pooling = graph_pooling::mean )
{
  if ( samples.empty() )
  {
    throw eval_error( "train_bound_head: empty dataset" );
  }
  matrix<double> x( static_cast<Eigen::Index>( samples.size() ), cfg.d );
  matrix<double> y( static_cast<Eigen::Index>( samples.size() ), 2 );
  for ( std::size_t i = 0; i < samples.size(); ++i )
  {
    const auto r = static_cast<Eigen::Index>( i );
    x.row( r ) = graph_embedding( ps, cfg, samples[i].graph, pooling ).transpose();
    y( r, 0 ) = samples[i].nodes - 0.5;
    y( r, 1 ) = samples[i].levels - 0.5;
  }
  return { fit_mlp( x, y, mc ).model, pooling };
}

/*! \brief Rounded-up, non-negative predictions plus slack (default one node and one level). */
inline bound_prediction predict_bounds( aig_graph const& cone, parameter_set<float>& ps, model_config const& cfg, bound_head const& head,
                                        std::uint32_t slack_nodes = 1, std::uint32_t slack_levels = 1 )
{
  const auto e = graph_embedding( ps, cfg, cone, head.pooling );
  const auto y = head.mlp.predict( e.transpose() );
  auto up = []( double v ) { return static_cast<std::uint32_t>( std::ceil( std::max( 0.0, v ) ) ); };
  return { up( y( 0, 0 ) ), up( y( 0, 1 ) ), slack_nodes, slack_levels };
}

} // namespace mgvga
