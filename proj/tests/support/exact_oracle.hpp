#pragma once

/* Minimum AND counts by breadth-first search over sets of computed functions.
   Shares nothing with the fence engine: no levels, no symmetry breaking. */

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_set>
#include <vector>

namespace oracle
{

inline std::uint32_t mask_of( std::uint32_t n ) { return ( 1u << ( 1u << n ) ) - 1u; }

/* a function and its complement cost the same; keep the smaller */
inline std::uint32_t norm( std::uint32_t f, std::uint32_t mask ) { return std::min( f, f ^ mask ); }

inline std::uint64_t pack( std::vector<std::uint32_t> s )
{
  std::sort( s.begin(), s.end() );
  std::uint64_t k = 0;
  for ( auto f : s )
  {
    k = ( k << 8 ) | f;
  }
  return k;
}

/* result[f] = minimum number of AND nodes for f (complemented edges free), or -1 beyond max_size */
inline std::vector<int> min_sizes( std::uint32_t n, int max_size )
{
  const auto mask = mask_of( n );
  std::vector<int> best( mask + 1, -1 );
  std::vector<std::uint32_t> start;
  for ( std::uint32_t i = 0; i < n; ++i )
  {
    std::uint32_t p = 0;
    for ( std::uint32_t a = 0; a <= ( 1u << n ) - 1; ++a )
    {
      p |= ( ( a >> i ) & 1u ) << a;
    }
    start.push_back( norm( p, mask ) );
    best[p] = best[p ^ mask] = 0;
  }
  std::vector<std::vector<std::uint32_t>> layer{ start };
  for ( int k = 1; k <= max_size; ++k )
  {
    std::vector<std::vector<std::uint32_t>> next;
    std::unordered_set<std::uint64_t> seen;
    for ( auto const& s : layer )
    {
      for ( std::size_t i = 0; i < s.size(); ++i )
      {
        for ( std::size_t j = i + 1; j < s.size(); ++j )
        {
          for ( std::uint32_t c = 0; c < 4; ++c )
          {
            const auto f = ( s[i] ^ ( c & 1 ? mask : 0u ) ) & ( s[j] ^ ( c & 2 ? mask : 0u ) );
            const auto nf = norm( f, mask );
            if ( nf == 0 || std::find( s.begin(), s.end(), nf ) != s.end() )
            {
              continue;
            }
            if ( best[f] < 0 )
            {
              best[f] = best[f ^ mask] = k;
            }
            if ( k < max_size )
            {
              auto t = s;
              t.push_back( nf );
              if ( seen.insert( pack( t ) ).second )
              {
                next.push_back( std::move( t ) );
              }
            }
          }
        }
      }
    }
    layer = std::move( next );
  }
  return best;
}

} // namespace oracle
