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
  \file steps.hpp
  \brief Masked gate modeling and Verilog-AIG alignment forward passes

  MGM encodes the full graph, replaces a fraction of latent rows with the mask
  token and decodes. VGA masks node types in the input graph, encodes it,
  replaces the node features by cross-attention over the Verilog
  representation and decodes. Both reconstruct type and (in, out) degree of
  the masked nodes.
*/

#pragma once

#include <cstdint>
#include <string>

#include "losses.hpp"
#include "../gnn/model.hpp"
#include "../util/kv_config.hpp"

namespace mgvga
{

enum class loss_schedule
{
  sum,      /* L_mgm + L_vga in every batch */
  alternate /* even steps MGM, odd steps VGA */
};

inline std::string to_string( loss_schedule s ) { return s == loss_schedule::sum ? "sum" : "alternate"; }

inline loss_schedule loss_schedule_from_string( std::string const& s )
{
  if ( s == "sum" )
  {
    return loss_schedule::sum;
  }
  if ( s == "alternate" )
  {
    return loss_schedule::alternate;
  }
  throw config_error( "unknown loss schedule '" + s + "' (expected sum or alternate)" );
}

struct train_config
{
  model_config model;
  double mgm_ratio{ 0.3 };
  double vga_ratio{ 0.5 };
  double lr{ 1e-3 };
  double weight_decay{ 0.01 };
  std::uint32_t batch_size{ 512 };
  std::uint32_t epochs{ 3 };
  std::uint64_t seed{ 0 };
  std::string lr_schedule{ "linear" }; /* linear | constant */
  double augment_p{ 0.1 };
  loss_schedule losses{ loss_schedule::sum };
  std::uint32_t checkpoint_every{ 0 }; /* optimizer steps; 0 keeps only the final checkpoint */

  void validate() const
  {
    model.validate();
    if ( !( mgm_ratio >= 0.0 && mgm_ratio < 1.0 ) || !( vga_ratio >= 0.0 && vga_ratio < 1.0 ) )
    {
      throw config_error( "masking ratios must lie in [0, 1)" );
    }
    if ( !( lr > 0.0 ) )
    {
      throw config_error( "learning rate must be positive" );
    }
    if ( weight_decay < 0.0 )
    {
      throw config_error( "weight decay must be nonnegative" );
    }
    if ( batch_size == 0 || epochs == 0 )
    {
      throw config_error( "batch size and epochs must be positive" );
    }
    if ( lr_schedule != "linear" && lr_schedule != "constant" )
    {
      throw config_error( "unknown lr schedule '" + lr_schedule + "'" );
    }
    if ( !( augment_p >= 0.0 && augment_p <= 1.0 ) )
    {
      throw config_error( "augmentation probability must lie in [0, 1]" );
    }
  }

  static train_config from( kv_config& cfg )
  {
    train_config c;
    c.model = model_config::from( cfg );
    c.mgm_ratio = cfg.get_double( "train.mgm_ratio", c.mgm_ratio );
    c.vga_ratio = cfg.get_double( "train.vga_ratio", c.vga_ratio );
    c.lr = cfg.get_double( "train.lr", c.lr );
    c.weight_decay = cfg.get_double( "train.weight_decay", c.weight_decay );
    c.batch_size = static_cast<std::uint32_t>( cfg.get_int( "train.batch_size", c.batch_size ) );
    c.epochs = static_cast<std::uint32_t>( cfg.get_int( "train.epochs", c.epochs ) );
    c.seed = static_cast<std::uint64_t>( cfg.get_int( "train.seed", static_cast<std::int64_t>( c.seed ) ) );
    c.lr_schedule = cfg.get_string( "train.lr_schedule", c.lr_schedule );
    c.augment_p = cfg.get_double( "train.augment_p", c.augment_p );
    c.losses = loss_schedule_from_string( cfg.get_string( "train.losses", to_string( c.losses ) ) );
    c.checkpoint_every = static_cast<std::uint32_t>( cfg.get_int( "train.checkpoint_every", c.checkpoint_every ) );
    c.validate();
    return c;
  }
};

/*! \brief Recorded loss graph of one MGM or VGA pass. */
template<class T>
struct step_forward
{
  var<T> loss;
  var<T> type_loss;
  var<T> degree_loss;
  var<T> probs;
  mask_selection mask;
};

/*! \brief Scalar outcome of a step; gradients land in the parameter set. */
struct step_result
{
  double loss{ 0.0 };
  double type_loss{ 0.0 };
  double degree_loss{ 0.0 };
  std::size_t num_masked{ 0 };
  std::size_t correct_types{ 0 };
  double degree_sq_error{ 0.0 }; /* summed over masked nodes and both heads */
};

namespace detail
{

template<class T>
step_forward<T> reconstruction_losses( tape<T>& t, parameter_set<T>& ps, var<T> decoded, graph_labels<T> const& labels, mask_selection sel )
{
  auto probs = predict_types( t, ps, decoded );
  auto deg = predict_degrees( t, ps, decoded );
  auto lt = loss_type( probs, labels.types, sel.masked );
  auto ld = loss_degree( deg, labels.degrees, sel.masked );
  return { add( lt, ld ), lt, ld, probs, std::move( sel ) };
}

template<class T>
step_result summarize( step_forward<T> const& f, graph_labels<T> const& labels )
{
  step_result r;
  r.loss = static_cast<double>( f.loss.scalar() );
  r.type_loss = static_cast<double>( f.type_loss.scalar() );
  r.degree_loss = static_cast<double>( f.degree_loss.scalar() );
  r.num_masked = f.mask.num_masked();
  r.correct_types = count_correct_types( f.probs.value(), labels.types, f.mask.masked );
  r.degree_sq_error = r.degree_loss * static_cast<double>( r.num_masked );
  return r;
}

} // namespace detail

/*! \brief Records L_mgm = L_type + L_degree on `t`. `g` must carry no MASKED nodes. */
template<class T>
step_forward<T> mgm_forward( tape<T>& t, parameter_set<T>& ps, aig_graph const& g, aggregation agg, double ratio, std::uint64_t seed )
{
  const auto labels = make_labels<T>( g );
  const auto gt = make_graph_tensors<T>( g, agg );
  auto x = encode( t, ps, gt );
  auto [masked, sel] = mask_latent( t, ps, x, ratio, seed );
  auto decoded = decode( t, ps, masked, gt );
  return detail::reconstruction_losses( t, ps, decoded, labels, std::move( sel ) );
}

/*! \brief Records L_vga on `t`; `xv` is the M x d_v Verilog representation paired with `g`. */
template<class T>
step_forward<T> vga_forward( tape<T>& t, parameter_set<T>& ps, aig_graph const& g, matrix<T> const& xv, aggregation agg, double ratio,
                             std::uint64_t seed )
{
  const auto labels = make_labels<T>( g );
  auto [masked_graph, sel] = mask_types( g, ratio, seed );
  const auto gt = make_graph_tensors<T>( masked_graph, agg );
  auto x = encode( t, ps, gt );
  auto attended = cross_attention( t, ps, x, xv );
  auto decoded = decode( t, ps, attended.output, gt );
  return detail::reconstruction_losses( t, ps, decoded, labels, std::move( sel ) );
}

/*! \brief Forward and backward of MGM; gradients accumulate into `ps` (caller zeroes them). */
template<class T>
step_result mgm_step( aig_graph const& g, parameter_set<T>& ps, train_config const& cfg, std::uint64_t seed, T loss_scale = T( 1 ) )
{
  tape<T> t;
  auto f = mgm_forward( t, ps, g, cfg.model.agg, cfg.mgm_ratio, seed );
  t.backward( loss_scale == T( 1 ) ? f.loss : scale( f.loss, loss_scale ) );
  return detail::summarize( f, make_labels<T>( g ) );
}

/*! \brief Forward and backward of VGA; gradients accumulate into `ps`. */
template<class T>
step_result vga_step( aig_graph const& g, matrix<T> const& xv, parameter_set<T>& ps, train_config const& cfg, std::uint64_t seed,
                      T loss_scale = T( 1 ) )
{
  tape<T> t;
  auto f = vga_forward( t, ps, g, xv, cfg.model.agg, cfg.vga_ratio, seed );
  t.backward( loss_scale == T( 1 ) ? f.loss : scale( f.loss, loss_scale ) );
  return detail::summarize( f, make_labels<T>( g ) );
}

/*! \brief Forward only, no gradient bookkeeping beyond the tape. */
template<class T>
step_result mgm_evaluate( aig_graph const& g, parameter_set<T>& ps, train_config const& cfg, std::uint64_t seed )
{
  tape<T> t;
  auto f = mgm_forward( t, ps, g, cfg.model.agg, cfg.mgm_ratio, seed );
  return detail::summarize( f, make_labels<T>( g ) );
}

template<class T>
step_result vga_evaluate( aig_graph const& g, matrix<T> const& xv, parameter_set<T>& ps, train_config const& cfg, std::uint64_t seed )
{
  tape<T> t;
  auto f = vga_forward( t, ps, g, xv, cfg.model.agg, cfg.vga_ratio, seed );
  return detail::summarize( f, make_labels<T>( g ) );
}

} // namespace mgvga
