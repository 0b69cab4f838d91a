#pragma once

/* Counting references for the ranking and ROC metrics. Quadratic on purpose:
   each value is computed straight from its definition. */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle
{

/* position of every index in a descending, index-tie-broken ranking, by counting */
inline std::size_t rank_of( std::vector<double> const& v, std::size_t i )
{
  std::size_t r = 0;
  for ( std::size_t j = 0; j < v.size(); ++j )
  {
    if ( v[j] > v[i] || ( v[j] == v[i] && j < i ) )
    {
      ++r;
    }
  }
  return r;
}

inline double brute_ndcg( std::vector<double> const& a, std::vector<double> const& b, std::size_t k )
{
  double dcg = 0.0;
  for ( std::size_t i = 0; i < a.size(); ++i )
  {
    const auto r = rank_of( b, i );
    if ( r < k )
    {
      dcg += a[i] / std::log2( r + 2.0 );
    }
  }
  auto sorted = a;
  std::sort( sorted.rbegin(), sorted.rend() );
  double ideal = 0.0;
  for ( std::size_t i = 0; i < k; ++i )
  {
    ideal += sorted[i] / std::log2( i + 2.0 );
  }
  return dcg / ideal;
}

inline double brute_topk( std::vector<double> const& a, std::vector<double> const& b, std::size_t m )
{
  std::size_t both = 0;
  for ( std::size_t i = 0; i < a.size(); ++i )
  {
    both += ( rank_of( a, i ) < m && rank_of( b, i ) < m ) ? 1 : 0;
  }
  return static_cast<double>( both ) / static_cast<double>( m );
}

inline double brute_auc( std::vector<double> const& s, std::vector<bool> const& l )
{
  double num = 0.0, den = 0.0;
  for ( std::size_t i = 0; i < s.size(); ++i )
  {
    for ( std::size_t j = 0; j < s.size(); ++j )
    {
      if ( l[i] && !l[j] )
      {
        den += 1.0;
        num += s[i] > s[j] ? 1.0 : ( s[i] == s[j] ? 0.5 : 0.0 );
      }
    }
  }
  return num / den;
}

} // namespace oracle
