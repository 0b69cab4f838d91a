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
  \file qor.hpp
  \brief Graph embeddings from a frozen encoder and the QoR regression head
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "metrics.hpp"
#include "../aig/aiger.hpp"
#include "../data/dataset.hpp"
#include "../data/sequences.hpp"
#include "../diff/adam.hpp"
#include "../diff/ops.hpp"
#include "../gnn/model.hpp"

namespace mgvga
{

class eval_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class graph_pooling
{
  mean,
  max
};

inline std::string_view to_string( graph_pooling p ) { return p == graph_pooling::mean ? "mean" : "max"; }

inline graph_pooling graph_pooling_from_string( std::string_view s )
{
  if ( s == "mean" )
  {
    return graph_pooling::mean;
  }
  if ( s == "max" )
  {
    return graph_pooling::max;
  }
  throw config_error( "unknown pooling '" + std::string( s ) + "' (expected mean or max)" );
}

/*!
  \brief Pooled encoder output X = g_E(V, A) of an unmasked graph.

  Only a forward pass is taken, so `ps` (values and gradient buffers) is left untouched.
*/
inline Eigen::VectorXd graph_embedding( parameter_set<float>& ps, model_config const& cfg, aig_graph const& g,
                                        graph_pooling pooling = graph_pooling::mean )
{
  if ( g.empty() )
  {
    throw eval_error( "graph_embedding: empty graph" );
  }
  tape<float> t;
  const auto gt = make_graph_tensors<float>( g, cfg.agg );
  auto const& x = encode( t, ps, gt ).value();
  const Eigen::MatrixXd xd = x.cast<double>();
  if ( pooling == graph_pooling::mean )
  {
    return xd.colwise().mean().transpose();
  }
  return xd.colwise().maxCoeff().transpose();
}

inline constexpr std::size_t default_sequence_length = 20;

/*! \brief Flattened one-hot of length `length * 7`; steps beyond the sequence stay all-zero. */
inline Eigen::VectorXd encode_sequence( opt_sequence const& s, std::size_t length = default_sequence_length )
{
  if ( s.steps.size() > length )
  {
    throw eval_error( "sequence " + std::to_string( s.id ) + " has " + std::to_string( s.steps.size() ) +
                      " steps, more than the encoding length " + std::to_string( length ) );
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero( static_cast<Eigen::Index>( length * transform_vocabulary.size() ) );
  for ( std::size_t i = 0; i < s.steps.size(); ++i )
  {
    const auto it = std::find( transform_vocabulary.begin(), transform_vocabulary.end(), s.steps[i] );
    if ( it == transform_vocabulary.end() )
    {
      throw eval_error( "unknown transform '" + s.steps[i] + "'" );
    }
    v( static_cast<Eigen::Index>( i * transform_vocabulary.size() + static_cast<std::size_t>( it - transform_vocabulary.begin() ) ) ) = 1.0;
  }
  return v;
}

struct qor_sample
{
  std::size_t design{ 0 }; /* index into qor_dataset::designs */
  opt_sequence sequence;
  double gate_count{ 0.0 };
  double label{ 0.0 }; /* normalized within its design */
};

struct qor_design
{
  std::string id;
  Eigen::VectorXd embedding;
  bool degenerate{ false }; /* all sequences gave the same gate count */
};

struct qor_dataset
{
  std::vector<qor_design> designs;
  std::vector<qor_sample> samples;
  std::size_t sequence_length{ default_sequence_length };

  /*! \brief Normalizes the gate counts of every design over its own samples. */
  void normalize()
  {
    for ( std::size_t d = 0; d < designs.size(); ++d )
    {
      std::vector<std::size_t> idx;
      std::vector<double> a;
      for ( std::size_t i = 0; i < samples.size(); ++i )
      {
        if ( samples[i].design == d )
        {
          idx.push_back( i );
          a.push_back( samples[i].gate_count );
        }
      }
      if ( a.size() < 2 )
      {
        throw eval_error( "design '" + designs[d].id + "' needs at least two labelled sequences" );
      }
      const auto n = normalize_labels( a );
      designs[d].degenerate = n.degenerate;
      for ( std::size_t k = 0; k < idx.size(); ++k )
      {
        samples[idx[k]].label = n.values[k];
      }
    }
  }
};

struct qor_config
{
  std::size_t hidden{ 128 };
  std::size_t epochs{ 2000 };
  double lr{ 3e-3 };
  double weight_decay{ 0.0 };
  std::uint64_t seed{ 0 };
  graph_pooling pooling{ graph_pooling::mean };

  void validate() const
  {
    if ( hidden == 0 || epochs == 0 || !( lr > 0.0 ) || weight_decay < 0.0 )
    {
      throw config_error( "qor: hidden, epochs and lr must be positive and weight_decay non-negative" );
    }
  }

  static qor_config from( kv_config& cfg )
  {
    qor_config q;
    q.hidden = static_cast<std::size_t>( cfg.get_int( "qor.hidden", static_cast<std::int64_t>( q.hidden ) ) );
    q.epochs = static_cast<std::size_t>( cfg.get_int( "qor.epochs", static_cast<std::int64_t>( q.epochs ) ) );
    q.lr = cfg.get_double( "qor.lr", q.lr );
    q.weight_decay = cfg.get_double( "qor.weight_decay", q.weight_decay );
    q.pooling = graph_pooling_from_string( cfg.get_string( "eval.pooling", std::string( to_string( q.pooling ) ) ) );
    q.validate();
    return q;
  }
};

struct mlp_config
{
  std::size_t hidden{ 128 };
  std::size_t epochs{ 2000 };
  double lr{ 3e-3 };
  double weight_decay{ 0.0 };
  std::uint64_t seed{ 0 };
};

/*! \brief Two-layer perceptron y = relu(x W1 + b1) W2 + b2. */
struct mlp_regressor
{
  parameter_set<double> params;

  matrix<double> predict( matrix<double> const& x ) const
  {
    const auto& w1 = params.get( "mlp.w1" ).value;
    if ( x.cols() != w1.rows() )
    {
      throw shape_error( "mlp: input width " + std::to_string( x.cols() ) + ", expected " + std::to_string( w1.rows() ) );
    }
    matrix<double> h = ( x * w1 ).rowwise() + params.get( "mlp.b1" ).value.row( 0 );
    h = h.cwiseMax( 0.0 );
    return ( h * params.get( "mlp.w2" ).value ).rowwise() + params.get( "mlp.b2" ).value.row( 0 );
  }

  static mlp_regressor zeros( Eigen::Index in, Eigen::Index hidden, Eigen::Index out )
  {
    mlp_regressor m;
    m.params.add( "mlp.w1", in, hidden );
    m.params.add( "mlp.b1", 1, hidden );
    m.params.add( "mlp.w2", hidden, out );
    m.params.add( "mlp.b2", 1, out );
    return m;
  }
};

struct mlp_fit
{
  mlp_regressor model;
  std::vector<double> loss; /* training MSE per epoch, before the update */
  double final_mse{ 0.0 };  /* mean over rows of the squared error summed over outputs */
};

/*! \brief Full-batch Adam on the squared error. */
inline mlp_fit fit_mlp( matrix<double> const& x, matrix<double> const& y, mlp_config const& cfg )
{
  if ( x.rows() == 0 || x.rows() != y.rows() )
  {
    throw eval_error( "fit_mlp: empty or mismatched training data" );
  }
  mlp_fit fit;
  const auto h = static_cast<Eigen::Index>( cfg.hidden );
  fit.model = mlp_regressor::zeros( x.cols(), h, y.cols() );
  auto& ps = fit.model.params;
  rng r( derive_seed( cfg.seed, 0x90e ) );
  auto fill = [&]( tensor<double>& t, double bound ) {
    for ( Eigen::Index i = 0; i < t.value.size(); ++i )
    {
      t.value.data()[i] = r.uniform( -bound, bound );
    }
  };
  fill( ps.get( "mlp.w1" ), 1.0 / std::sqrt( static_cast<double>( x.cols() ) ) );
  fill( ps.get( "mlp.w2" ), 1.0 / std::sqrt( static_cast<double>( h ) ) );

  adam_config ac;
  ac.lr = cfg.lr;
  ac.weight_decay = cfg.weight_decay;
  adam_state<double> st;
  for ( std::size_t e = 0; e < cfg.epochs; ++e )
  {
    ps.zero_grad();
    tape<double> t;
    auto xv = t.constant( x );
    auto hid = relu( add( matmul( xv, t.param( ps.get( "mlp.w1" ) ) ), t.param( ps.get( "mlp.b1" ) ) ) );
    auto out = add( matmul( hid, t.param( ps.get( "mlp.w2" ) ) ), t.param( ps.get( "mlp.b2" ) ) );
    auto loss = squared_error( out, y );
    fit.loss.push_back( loss.scalar() );
    t.backward( loss );
    adam_step( ps, st, ac );
  }
  fit.final_mse = ( fit.model.predict( x ) - y ).squaredNorm() / static_cast<double>( y.rows() );
  return fit;
}

/*! \brief Predicts the normalized gate count from [x_G ; x_seq]. */
struct qor_head
{
  mlp_regressor mlp;
  std::size_t sequence_length{ default_sequence_length };

  Eigen::VectorXd predict( qor_dataset const& data ) const { return mlp.predict( features( data ) ).col( 0 ); }

  matrix<double> features( qor_dataset const& data ) const
  {
    if ( data.samples.empty() )
    {
      throw eval_error( "qor: empty dataset" );
    }
    const auto d = data.designs.at( data.samples.front().design ).embedding.size();
    const auto s = static_cast<Eigen::Index>( sequence_length * transform_vocabulary.size() );
    matrix<double> x( static_cast<Eigen::Index>( data.samples.size() ), d + s );
    for ( std::size_t i = 0; i < data.samples.size(); ++i )
    {
      auto const& e = data.designs.at( data.samples[i].design ).embedding;
      if ( e.size() != d )
      {
        throw eval_error( "qor: design embeddings differ in width" );
      }
      x.row( static_cast<Eigen::Index>( i ) ) << e.transpose(), encode_sequence( data.samples[i].sequence, sequence_length ).transpose();
    }
    return x;
  }
};

struct qor_fit
{
  qor_head head;
  std::vector<double> loss;
  double final_mse{ 0.0 };
};

inline qor_fit train_qor_head( qor_dataset const& data, qor_config const& cfg )
{
  cfg.validate();
  if ( data.samples.empty() )
  {
    throw eval_error( "train_qor_head: empty dataset" );
  }
  qor_fit fit;
  fit.head.sequence_length = data.sequence_length;
  const matrix<double> x = fit.head.features( data );
  matrix<double> y( x.rows(), 1 );
  for ( std::size_t i = 0; i < data.samples.size(); ++i )
  {
    y( static_cast<Eigen::Index>( i ), 0 ) = data.samples[i].label;
  }
  auto f = fit_mlp( x, y, { cfg.hidden, cfg.epochs, cfg.lr, cfg.weight_decay, cfg.seed } );
  fit.head.mlp = std::move( f.model );
  fit.loss = std::move( f.loss );
  fit.final_mse = f.final_mse;
  return fit;
}

struct qor_design_metrics
{
  std::string design;
  std::size_t sequences{ 0 };
  double ndcg3{ 0.0 }, ndcg5{ 0.0 };
  double top3{ 0.0 }, top5{ 0.0 }, top10{ 0.0 };
  bool undefined{ false }; /* degenerate labels: ranking metrics carry no information */
};

struct qor_report
{
  std::vector<qor_design_metrics> designs;
  qor_design_metrics mean; /* over designs with defined metrics */

  std::string to_csv() const
  {
    std::ostringstream os;
    os << "design,sequences,ndcg@3,ndcg@5,top3%,top5%,top10%,undefined\n";
    auto row = [&]( qor_design_metrics const& m ) {
      os << m.design << ',' << m.sequences << ',' << m.ndcg3 << ',' << m.ndcg5 << ',' << m.top3 << ',' << m.top5 << ','
         << m.top10 << ',' << ( m.undefined ? 1 : 0 ) << '\n';
    };
    for ( auto const& m : designs )
    {
      row( m );
    }
    row( mean );
    return os.str();
  }

  nlohmann::json to_json() const
  {
    return { { "designs", designs.size() },
             { "NDCG@3", mean.ndcg3 },
             { "NDCG@5", mean.ndcg5 },
             { "Top-3%", mean.top3 },
             { "Top-5%", mean.top5 },
             { "Top-10%", mean.top10 },
             { "undefined_designs", std::count_if( designs.begin(), designs.end(), []( auto const& m ) { return m.undefined; } ) } };
  }
};

/*! \brief Ranking metrics per design: labels are the normalized gate counts, scores the head's predictions. */
inline qor_report evaluate_qor( qor_head const& head, qor_dataset const& data )
{
  const auto pred = head.predict( data );
  qor_report rep;
  rep.mean.design = "mean";
  std::size_t defined = 0;
  for ( std::size_t d = 0; d < data.designs.size(); ++d )
  {
    std::vector<double> a, b;
    for ( std::size_t i = 0; i < data.samples.size(); ++i )
    {
      if ( data.samples[i].design == d )
      {
        a.push_back( data.samples[i].gate_count );
        b.push_back( pred( static_cast<Eigen::Index>( i ) ) );
      }
    }
    qor_design_metrics m;
    m.design = data.designs[d].id;
    m.sequences = a.size();
    if ( a.size() < 2 )
    {
      m.undefined = true;
      rep.designs.push_back( m );
      continue;
    }
    const auto an = normalize_labels( a );
    const auto n3 = ndcg_at_k( an.values, b, std::min<std::size_t>( 3, a.size() ) );
    const auto n5 = ndcg_at_k( an.values, b, std::min<std::size_t>( 5, a.size() ) );
    m.undefined = an.degenerate || n3.undefined || n5.undefined;
    m.ndcg3 = n3.value;
    m.ndcg5 = n5.value;
    m.top3 = topk_commonality( an.values, b, 3.0 );
    m.top5 = topk_commonality( an.values, b, 5.0 );
    m.top10 = topk_commonality( an.values, b, 10.0 );
    if ( !m.undefined )
    {
      ++defined;
      rep.mean.ndcg3 += m.ndcg3;
      rep.mean.ndcg5 += m.ndcg5;
      rep.mean.top3 += m.top3;
      rep.mean.top5 += m.top5;
      rep.mean.top10 += m.top10;
      rep.mean.sequences += m.sequences;
    }
    rep.designs.push_back( m );
  }
  if ( defined )
  {
    const auto k = static_cast<double>( defined );
    rep.mean.ndcg3 /= k;
    rep.mean.ndcg5 /= k;
    rep.mean.top3 /= k;
    rep.mean.top5 /= k;
    rep.mean.top10 /= k;
  }
  else
  {
    rep.mean.undefined = true;
  }
  return rep;
}

/*!
  \brief Collects the successful labels of one split of a dataset manifest.

  Failed tool runs are left out of S. Embeddings come from the frozen encoder.
*/
inline qor_dataset qor_dataset_from_manifest( dataset_manifest const& m, std::filesystem::path const& root, std::string_view split,
                                              parameter_set<float>& ps, model_config const& mcfg,
                                              graph_pooling pooling = graph_pooling::mean,
                                              std::size_t sequence_length = default_sequence_length )
{
  qor_dataset data;
  data.sequence_length = sequence_length;
  std::map<std::uint32_t, opt_sequence const*> seqs;
  for ( auto const& s : m.sequences )
  {
    seqs[s.id] = &s;
  }
  std::map<std::string, std::size_t> index;
  for ( auto const& d : m.designs )
  {
    if ( !d.ok || ( !split.empty() && d.split != split ) )
    {
      continue;
    }
    const auto g = read_aiger_file( root / d.path );
    index[d.id] = data.designs.size();
    data.designs.push_back( { d.id, graph_embedding( ps, mcfg, g, pooling ), false } );
  }
  for ( auto const& l : m.labels )
  {
    const auto it = index.find( l.design );
    if ( !l.ok || it == index.end() )
    {
      continue;
    }
    const auto s = seqs.find( l.sequence_id );
    if ( s == seqs.end() )
    {
      throw eval_error( "label refers to unknown sequence " + std::to_string( l.sequence_id ) );
    }
    data.samples.push_back( { it->second, *s->second, static_cast<double>( l.gate_count ), 0.0 } );
  }
  if ( data.samples.empty() )
  {
    throw eval_error( "no successful labels in split '" + std::string( split ) + "'" );
  }
  data.normalize();
  return data;
}

} // namespace mgvga
