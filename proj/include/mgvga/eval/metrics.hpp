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
  \file metrics.hpp
  \brief Ranking and classification metrics

  Rankings break ties by lower index first everywhere.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mgvga
{

class metric_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

struct normalized_labels
{
  std::vector<double> values;
  double mean{ 0.0 };
  double stddev{ 0.0 }; /* population */
  bool degenerate{ false };
};

/*! \brief A_i -> (mean - A_i) / sigma: fewer gates give larger scores. Constant input gives zeros and `degenerate`. */
inline normalized_labels normalize_labels( std::vector<double> const& a )
{
  if ( a.size() < 2 )
  {
    throw metric_error( "normalize_labels: need at least two labels" );
  }
  normalized_labels n;
  const auto s = static_cast<double>( a.size() );
  n.mean = std::accumulate( a.begin(), a.end(), 0.0 ) / s;
  double var = 0.0;
  for ( auto x : a )
  {
    var += ( x - n.mean ) * ( x - n.mean );
  }
  n.stddev = std::sqrt( var / s );
  n.values.assign( a.size(), 0.0 );
  if ( n.stddev == 0.0 )
  {
    n.degenerate = true;
    return n;
  }
  for ( std::size_t i = 0; i < a.size(); ++i )
  {
    n.values[i] = ( n.mean - a[i] ) / n.stddev;
  }
  return n;
}

/*! \brief Indices sorted by descending score, lower index first on ties. */
inline std::vector<std::size_t> rank_descending( std::vector<double> const& v )
{
  std::vector<std::size_t> idx( v.size() );
  std::iota( idx.begin(), idx.end(), std::size_t{ 0 } );
  std::stable_sort( idx.begin(), idx.end(), [&]( auto a, auto b ) { return v[a] > v[b]; } );
  return idx;
}

struct ndcg_result
{
  double value{ 0.0 };
  bool undefined{ false }; /* ideal DCG is zero */
};

/*!
  \brief DCG of B's top-k under gains `a_norm`, over the ideal DCG of a_norm's own top-k.

  Position i (1-based) is discounted by 1 / log2(i + 1).
*/
inline ndcg_result ndcg_at_k( std::vector<double> const& a_norm, std::vector<double> const& b, std::size_t k )
{
  if ( a_norm.size() != b.size() )
  {
    throw metric_error( "ndcg_at_k: label and score vectors differ in length" );
  }
  if ( k < 1 || k > a_norm.size() )
  {
    throw metric_error( "ndcg_at_k: k must lie in [1, S]" );
  }
  const auto by_b = rank_descending( b );
  const auto by_a = rank_descending( a_norm );
  double dcg = 0.0, ideal = 0.0;
  for ( std::size_t i = 0; i < k; ++i )
  {
    const double discount = 1.0 / std::log2( static_cast<double>( i ) + 2.0 );
    dcg += a_norm[by_b[i]] * discount;
    ideal += a_norm[by_a[i]] * discount;
  }
  ndcg_result r;
  if ( std::abs( ideal ) < 1e-15 )
  {
    r.undefined = true;
    return r;
  }
  r.value = dcg / ideal;
  return r;
}

/*! \brief Size of a top-k% set: ceil(k * S / 100). */
inline std::size_t topk_size( std::size_t s, double k_percent )
{
  return static_cast<std::size_t>( std::ceil( k_percent * static_cast<double>( s ) / 100.0 - 1e-9 ) );
}

/*! \brief |top_k%(A) ∩ top_k%(B)| / |top_k%(A)| over the normalized labels and the scores. */
inline double topk_commonality( std::vector<double> const& a_norm, std::vector<double> const& b, double k_percent )
{
  if ( a_norm.size() != b.size() )
  {
    throw metric_error( "topk_commonality: label and score vectors differ in length" );
  }
  const auto m = topk_size( a_norm.size(), k_percent );
  if ( !( k_percent > 0.0 && k_percent <= 100.0 ) || m < 1 )
  {
    throw metric_error( "topk_commonality: the top set would be empty" );
  }
  auto ta = rank_descending( a_norm );
  auto tb = rank_descending( b );
  ta.resize( m );
  tb.resize( m );
  std::sort( ta.begin(), ta.end() );
  std::sort( tb.begin(), tb.end() );
  std::vector<std::size_t> both;
  std::set_intersection( ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter( both ) );
  return static_cast<double>( both.size() ) / static_cast<double>( m );
}

struct roc_point
{
  double threshold;
  double fpr;
  double tpr;
};

struct confusion
{
  std::size_t tp{ 0 }, fp{ 0 }, tn{ 0 }, fn{ 0 };

  double precision() const { return tp + fp ? static_cast<double>( tp ) / static_cast<double>( tp + fp ) : 0.0; }
  double recall() const { return tp + fn ? static_cast<double>( tp ) / static_cast<double>( tp + fn ) : 0.0; }
  double f1() const
  {
    const auto p = precision(), r = recall();
    return p + r > 0.0 ? 2.0 * p * r / ( p + r ) : 0.0;
  }
  double accuracy() const { return static_cast<double>( tp + tn ) / static_cast<double>( tp + fp + tn + fn ); }
};

struct roc_result
{
  /*! \brief From (0, 0) to (1, 1); point i predicts positive for score >= threshold. */
  std::vector<roc_point> points;
  double auc{ 0.0 };
  double threshold{ 0.0 }; /* maximizes TPR - FPR, the highest such threshold on ties */
  double youden_j{ 0.0 };
  confusion at_threshold;
};

inline confusion confusion_at( std::vector<double> const& scores, std::vector<bool> const& labels, double threshold )
{
  confusion c;
  for ( std::size_t i = 0; i < scores.size(); ++i )
  {
    const bool pred = scores[i] >= threshold;
    if ( labels[i] )
    {
      ++( pred ? c.tp : c.fn );
    }
    else
    {
      ++( pred ? c.fp : c.tn );
    }
  }
  return c;
}

/*! \brief ROC sweep over every distinct score, trapezoidal AUC and the Youden-optimal threshold. */
inline roc_result roc_and_threshold( std::vector<double> const& scores, std::vector<bool> const& labels )
{
  if ( scores.size() != labels.size() )
  {
    throw metric_error( "roc: score and label vectors differ in length" );
  }
  const auto pos = static_cast<std::size_t>( std::count( labels.begin(), labels.end(), true ) );
  const auto neg = labels.size() - pos;
  if ( pos == 0 || neg == 0 )
  {
    throw metric_error( "roc: both classes must be present" );
  }
  auto order = rank_descending( scores );
  roc_result r;
  r.points.push_back( { std::numeric_limits<double>::infinity(), 0.0, 0.0 } );
  std::size_t tp = 0, fp = 0;
  double best_j = -1.0;
  for ( std::size_t i = 0; i < order.size(); )
  {
    // consume one group of tied scores
    const double s = scores[order[i]];
    for ( ; i < order.size() && scores[order[i]] == s; ++i )
    {
      ++( labels[order[i]] ? tp : fp );
    }
    roc_point p{ s, static_cast<double>( fp ) / static_cast<double>( neg ), static_cast<double>( tp ) / static_cast<double>( pos ) };
    auto const& q = r.points.back();
    r.auc += ( p.fpr - q.fpr ) * ( p.tpr + q.tpr ) / 2.0;
    if ( p.tpr - p.fpr > best_j )
    {
      best_j = p.tpr - p.fpr;
      r.threshold = s;
    }
    r.points.push_back( p );
  }
  r.youden_j = best_j;
  r.at_threshold = confusion_at( scores, labels, r.threshold );
  return r;
}

struct cosine_result
{
  double value{ 0.0 };
  bool zero_vector{ false };
};

template<class V>
cosine_result cosine_similarity( V const& a, V const& b )
{
  const double na = a.norm(), nb = b.norm();
  cosine_result r;
  if ( na == 0.0 || nb == 0.0 )
  {
    r.zero_vector = true;
    return r;
  }
  r.value = std::clamp( static_cast<double>( a.dot( b ) ) / ( na * nb ), -1.0, 1.0 );
  return r;
}

} // namespace mgvga
