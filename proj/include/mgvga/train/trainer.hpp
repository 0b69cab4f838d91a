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
  \file trainer.hpp
  \brief Combined MGM + VGA training loop with metrics and checkpoints
*/

#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "steps.hpp"
#include "../aig/augment.hpp"
#include "../diff/adam.hpp"
#include "../diff/checkpoint.hpp"
#include "../util/hash.hpp"

namespace mgvga
{

class train_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct train_sample
{
  std::string name;
  aig_graph graph;
  /*! \brief Pooled M x d_v Verilog representation, when paired and available. */
  std::optional<matrix<float>> verilog;
  /*! \brief The sample has a Verilog pair whose embedding could not be obtained. */
  bool verilog_missing{ false };
};

struct metrics_row
{
  std::uint64_t step{ 0 };
  std::uint32_t epoch{ 0 };
  double lr{ 0.0 };
  std::size_t graphs{ 0 };
  std::size_t vga_graphs{ 0 };
  double l_mgm{ 0.0 };
  double l_vga{ 0.0 };
  double l_mgvga{ 0.0 };
  double masked_type_accuracy{ 0.0 };
  double masked_degree_mse{ 0.0 };
  double vga_type_accuracy{ 0.0 };
};

struct train_result
{
  parameter_set<float> params;
  std::vector<metrics_row> metrics;
  /*! \brief Samples that contributed L_mgm only because their embedding was missing. */
  std::vector<std::string> flagged;
  std::optional<std::filesystem::path> checkpoint;
  std::uint64_t steps{ 0 };
};

inline nlohmann::json to_json( model_config const& m )
{
  return { { "d", m.d }, { "d_v", m.d_v }, { "encoder_layers", m.encoder_layers }, { "decoder_layers", m.decoder_layers },
           { "aggregation", to_string( m.agg ) } };
}

inline model_config model_config_from_json( nlohmann::json const& j )
{
  model_config m;
  m.d = j.at( "d" ).get<std::uint32_t>();
  m.d_v = j.at( "d_v" ).get<std::uint32_t>();
  m.encoder_layers = j.at( "encoder_layers" ).get<std::uint32_t>();
  m.decoder_layers = j.at( "decoder_layers" ).get<std::uint32_t>();
  m.agg = aggregation_from_string( j.at( "aggregation" ).get<std::string>() );
  m.validate();
  return m;
}

inline nlohmann::json to_json( train_config const& c )
{
  return { { "model", to_json( c.model ) },
           { "mgm_ratio", c.mgm_ratio },
           { "vga_ratio", c.vga_ratio },
           { "lr", c.lr },
           { "weight_decay", c.weight_decay },
           { "batch_size", c.batch_size },
           { "epochs", c.epochs },
           { "seed", c.seed },
           { "lr_schedule", c.lr_schedule },
           { "augment_p", c.augment_p },
           { "losses", to_string( c.losses ) },
           { "checkpoint_every", c.checkpoint_every } };
}

inline std::string metrics_csv( std::vector<metrics_row> const& rows )
{
  std::ostringstream os;
  os.precision( 9 );
  os << "step,epoch,lr,graphs,vga_graphs,l_mgm,l_vga,l_mgvga,masked_type_acc,masked_degree_mse,vga_type_acc\n";
  for ( auto const& r : rows )
  {
    os << r.step << ',' << r.epoch << ',' << r.lr << ',' << r.graphs << ',' << r.vga_graphs << ',' << r.l_mgm << ',' << r.l_vga << ','
       << r.l_mgvga << ',' << r.masked_type_accuracy << ',' << r.masked_degree_mse << ',' << r.vga_type_accuracy << '\n';
  }
  return os.str();
}

/*! \brief Model parameters and config restored from a training checkpoint. */
struct trained_model
{
  model_config config;
  parameter_set<float> params;
};

inline trained_model load_trained_model( std::filesystem::path const& path )
{
  auto c = load_checkpoint( path );
  if ( !c.meta.contains( "model" ) )
  {
    throw checkpoint_error( "checkpoint '" + path.string() + "' carries no model config" );
  }
  trained_model m;
  m.config = model_config_from_json( c.meta.at( "model" ) );
  m.params = init_model<float>( m.config, 0 );
  assign_from( m.params, c.params );
  return m;
}

struct train_options
{
  /*! \brief Directory receiving metrics.csv and checkpoints; nothing is written when empty. */
  std::filesystem::path out_dir;
  /*! \brief Starting parameters; freshly initialized from the seed when absent. */
  std::optional<parameter_set<float>> initial;
  /*! \brief Called after every optimizer step. */
  std::function<void( metrics_row const& )> on_step;
};

/*!
  \brief Trains the model on `data`.

  Each optimizer step accumulates the gradients of a fixed-order slice of
  `batch_size` graphs, each scaled by 1/B. A graph contributes L_mgm, plus
  L_vga when it has a Verilog representation. Buffer augmentation is redrawn
  per epoch and labels come from the augmented graph.
*/
inline train_result train( std::vector<train_sample> const& data, train_config const& cfg, train_options const& opts = {} )
{
  cfg.validate();
  if ( data.empty() )
  {
    throw train_error( "training dataset is empty" );
  }
  for ( auto const& s : data )
  {
    if ( s.verilog && s.verilog->cols() != static_cast<Eigen::Index>( cfg.model.d_v ) )
    {
      throw train_error( "sample '" + s.name + "' has a Verilog representation of width " + std::to_string( s.verilog->cols() ) +
                         ", expected " + std::to_string( cfg.model.d_v ) );
    }
  }

  train_result res;
  res.params = opts.initial ? *opts.initial : init_model<float>( cfg.model, derive_seed( cfg.seed, 0x1417 ) );
  auto& ps = res.params;
  for ( auto const& s : data )
  {
    if ( s.verilog_missing && !s.verilog )
    {
      res.flagged.push_back( s.name );
    }
  }

  adam_config acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  adam_state<float> state;

  const std::size_t batches_per_epoch = ( data.size() + cfg.batch_size - 1 ) / cfg.batch_size;
  const std::uint64_t total_steps = static_cast<std::uint64_t>( batches_per_epoch ) * cfg.epochs;
  const bool write = !opts.out_dir.empty();
  if ( write )
  {
    std::filesystem::create_directories( opts.out_dir );
  }
  auto meta = [&]( std::uint64_t step ) {
    return nlohmann::json{ { "model", to_json( cfg.model ) }, { "train", to_json( cfg ) }, { "step", step } };
  };

  std::uint64_t step = 0;
  for ( std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch )
  {
    for ( std::size_t b = 0; b < batches_per_epoch; ++b )
    {
      const auto begin = b * cfg.batch_size;
      const auto end = std::min( data.size(), begin + cfg.batch_size );
      const float inv_b = 1.0f / static_cast<float>( end - begin );
      const bool mgm_turn = cfg.losses == loss_schedule::sum || step % 2 == 0;
      const bool vga_turn = cfg.losses == loss_schedule::sum || step % 2 == 1;
      ps.zero_grad();

      metrics_row row;
      row.step = step;
      row.epoch = epoch;
      row.lr = cfg.lr_schedule == "linear" ? linear_schedule( cfg.lr, step, total_steps ) : cfg.lr;
      std::size_t mgm_masked = 0, mgm_correct = 0, vga_masked = 0, vga_correct = 0;
      double degree_sq = 0.0;
      for ( auto i = begin; i < end; ++i )
      {
        auto const& s = data[i];
        const auto g = cfg.augment_p > 0.0 ? insert_buffers( s.graph, cfg.augment_p, derive_seed( cfg.seed, 1, epoch, i ) ) : s.graph;
        const bool paired = s.verilog.has_value();
        // a sample without a representation falls back to MGM on VGA turns
        if ( mgm_turn || !paired )
        {
          const auto r = mgm_step<float>( g, ps, cfg, derive_seed( cfg.seed, 2, epoch, i ), inv_b );
          row.l_mgm += r.loss * inv_b;
          mgm_masked += r.num_masked;
          mgm_correct += r.correct_types;
          degree_sq += r.degree_sq_error;
        }
        if ( vga_turn && paired )
        {
          const auto r = vga_step<float>( g, *s.verilog, ps, cfg, derive_seed( cfg.seed, 3, epoch, i ), inv_b );
          row.l_vga += r.loss * inv_b;
          vga_masked += r.num_masked;
          vga_correct += r.correct_types;
          ++row.vga_graphs;
        }
        ++row.graphs;
      }
      row.l_mgvga = row.l_mgm + row.l_vga;
      row.masked_type_accuracy = mgm_masked ? static_cast<double>( mgm_correct ) / static_cast<double>( mgm_masked ) : 0.0;
      row.masked_degree_mse = mgm_masked ? degree_sq / static_cast<double>( mgm_masked ) : 0.0;
      row.vga_type_accuracy = vga_masked ? static_cast<double>( vga_correct ) / static_cast<double>( vga_masked ) : 0.0;
      for ( std::size_t k = 0; k < ps.size(); ++k )
      {
        if ( !ps[k].grad.allFinite() )
        {
          throw train_error( "non-finite gradient in '" + ps[k].name + "' at step " + std::to_string( step ) );
        }
      }
      adam_step( ps, state, acfg, row.lr );
      ++step;
      res.metrics.push_back( row );
      if ( opts.on_step )
      {
        opts.on_step( row );
      }
      if ( write && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 )
      {
        save_checkpoint( opts.out_dir / ( "step_" + std::to_string( step ) + ".ckpt" ), ps, meta( step ) );
      }
    }
  }
  res.steps = step;
  if ( write )
  {
    res.checkpoint = opts.out_dir / "model.ckpt";
    save_checkpoint( *res.checkpoint, ps, meta( step ) );
    write_file_atomic( opts.out_dir / "metrics.csv", metrics_csv( res.metrics ) );
  }
  return res;
}

/*! \brief Masked type accuracy and degree MSE of MGM over `graphs`, without augmentation. */
struct mgm_evaluation
{
  double type_accuracy{ 0.0 };
  double degree_mse{ 0.0 };
  double loss{ 0.0 };
  std::size_t masked{ 0 };
};

inline mgm_evaluation evaluate_mgm( std::vector<aig_graph> const& graphs, parameter_set<float>& ps, train_config const& cfg, std::uint64_t seed )
{
  mgm_evaluation e;
  std::size_t correct = 0;
  double sq = 0.0;
  for ( std::size_t i = 0; i < graphs.size(); ++i )
  {
    const auto r = mgm_evaluate<float>( graphs[i], ps, cfg, derive_seed( seed, 4, i ) );
    correct += r.correct_types;
    sq += r.degree_sq_error;
    e.masked += r.num_masked;
    e.loss += r.loss / static_cast<double>( graphs.size() );
  }
  if ( e.masked )
  {
    e.type_accuracy = static_cast<double>( correct ) / static_cast<double>( e.masked );
    e.degree_mse = sq / static_cast<double>( e.masked );
  }
  return e;
}

} // namespace mgvga
