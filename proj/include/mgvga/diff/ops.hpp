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
  \file ops.hpp
  \brief Differentiable operations recorded on a `tape`
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tape.hpp"

namespace mgvga
{

namespace detail
{

template<class T>
void check_same_tape( char const* op, var<T> a, var<T> b )
{
  if ( a.owner != b.owner )
  {
    throw std::invalid_argument( std::string( op ) + ": operands live on different tapes" );
  }
}

[[noreturn]] inline void shape_fail( char const* op, std::string const& a, std::string const& b )
{
  throw shape_error( std::string( op ) + ": incompatible shapes " + a + " and " + b );
}

} // namespace detail

template<class T>
var<T> matmul( var<T> a, var<T> b )
{
  detail::check_same_tape( "matmul", a, b );
  auto& t = *a.owner;
  auto const& A = t.value( a );
  auto const& B = t.value( b );
  if ( A.cols() != B.rows() )
  {
    detail::shape_fail( "matmul", shape_string( A ), shape_string( B ) );
  }
  matrix<T> out = A * B;
  const auto ia = a.id, ib = b.id;
  return t.record( std::move( out ), t.needs_grad( a ) || t.needs_grad( b ), [ia, ib]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    if ( t.needs_grad( ia ) )
    {
      t.grad( ia ).noalias() += G * t.value( ib ).transpose();
    }
    if ( t.needs_grad( ib ) )
    {
      t.grad( ib ).noalias() += t.value( ia ).transpose() * G;
    }
  } );
}

template<class T>
var<T> transpose( var<T> a )
{
  auto& t = *a.owner;
  matrix<T> out = t.value( a ).transpose();
  const auto ia = a.id;
  return t.record( std::move( out ), t.needs_grad( a ), [ia]( tape<T>& t, std::uint32_t self ) {
    t.grad( ia ) += t.grad( self ).transpose();
  } );
}

/*! \brief Elementwise sum; `b` may also be a 1 x cols row broadcast over the rows of `a`. */
template<class T>
var<T> add( var<T> a, var<T> b )
{
  detail::check_same_tape( "add", a, b );
  auto& t = *a.owner;
  auto const& A = t.value( a );
  auto const& B = t.value( b );
  const bool same = A.rows() == B.rows() && A.cols() == B.cols();
  const bool broadcast = !same && B.rows() == 1 && B.cols() == A.cols();
  if ( !same && !broadcast )
  {
    detail::shape_fail( "add", shape_string( A ), shape_string( B ) );
  }
  matrix<T> out = A;
  if ( same )
  {
    out += B;
  }
  else
  {
    out.rowwise() += B.row( 0 );
  }
  const auto ia = a.id, ib = b.id;
  return t.record( std::move( out ), t.needs_grad( a ) || t.needs_grad( b ), [ia, ib, broadcast]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    if ( t.needs_grad( ia ) )
    {
      t.grad( ia ) += G;
    }
    if ( t.needs_grad( ib ) )
    {
      if ( broadcast )
      {
        t.grad( ib ) += G.colwise().sum();
      }
      else
      {
        t.grad( ib ) += G;
      }
    }
  } );
}

template<class T>
var<T> sub( var<T> a, var<T> b )
{
  detail::check_same_tape( "sub", a, b );
  auto& t = *a.owner;
  auto const& A = t.value( a );
  auto const& B = t.value( b );
  if ( A.rows() != B.rows() || A.cols() != B.cols() )
  {
    detail::shape_fail( "sub", shape_string( A ), shape_string( B ) );
  }
  matrix<T> out = A - B;
  const auto ia = a.id, ib = b.id;
  return t.record( std::move( out ), t.needs_grad( a ) || t.needs_grad( b ), [ia, ib]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    if ( t.needs_grad( ia ) )
    {
      t.grad( ia ) += G;
    }
    if ( t.needs_grad( ib ) )
    {
      t.grad( ib ) -= G;
    }
  } );
}

template<class T>
var<T> scale( var<T> a, T s )
{
  auto& t = *a.owner;
  matrix<T> out = t.value( a ) * s;
  const auto ia = a.id;
  return t.record( std::move( out ), t.needs_grad( a ), [ia, s]( tape<T>& t, std::uint32_t self ) {
    t.grad( ia ) += t.grad( self ) * s;
  } );
}

/*! \brief Elementwise product of equally shaped operands. */
template<class T>
var<T> hadamard( var<T> a, var<T> b )
{
  detail::check_same_tape( "hadamard", a, b );
  auto& t = *a.owner;
  auto const& A = t.value( a );
  auto const& B = t.value( b );
  if ( A.rows() != B.rows() || A.cols() != B.cols() )
  {
    detail::shape_fail( "hadamard", shape_string( A ), shape_string( B ) );
  }
  matrix<T> out = A.cwiseProduct( B );
  const auto ia = a.id, ib = b.id;
  return t.record( std::move( out ), t.needs_grad( a ) || t.needs_grad( b ), [ia, ib]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    if ( t.needs_grad( ia ) )
    {
      t.grad( ia ) += G.cwiseProduct( t.value( ib ) );
    }
    if ( t.needs_grad( ib ) )
    {
      t.grad( ib ) += G.cwiseProduct( t.value( ia ) );
    }
  } );
}

template<class T>
var<T> relu( var<T> a )
{
  auto& t = *a.owner;
  auto const& A = t.value( a );
  matrix<T> out = A.cwiseMax( T( 0 ) );
  {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for ( Eigen::Index i = 0; i < A.size(); ++i )
    {
      h = ( h ^ static_cast<std::uint64_t>( A.data()[i] > T( 0 ) ) ) * 0x100000001b3ull;
    }
    t.record_kinks( h );
  }
  const auto ia = a.id;
  return t.record( std::move( out ), t.needs_grad( a ), [ia]( tape<T>& t, std::uint32_t self ) {
    auto const& A = t.value( ia );
    t.grad( ia ) += ( A.array() > T( 0 ) ).select( t.grad( self ), T( 0 ) );
  } );
}

/*! \brief Row-wise layer normalization with a 1 x cols gain and bias. */
template<class T>
var<T> layer_norm( var<T> x, var<T> gain, var<T> bias, T eps = T( 1e-5 ) )
{
  detail::check_same_tape( "layer_norm", x, gain );
  detail::check_same_tape( "layer_norm", x, bias );
  auto& t = *x.owner;
  auto const& X = t.value( x );
  auto const& g = t.value( gain );
  auto const& b = t.value( bias );
  if ( g.rows() != 1 || b.rows() != 1 || g.cols() != X.cols() || b.cols() != X.cols() )
  {
    detail::shape_fail( "layer_norm", shape_string( X ), shape_string( g ) + "/" + shape_string( b ) );
  }
  const auto n = X.cols();
  matrix<T> xhat( X.rows(), n );
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std( X.rows() );
  for ( Eigen::Index r = 0; r < X.rows(); ++r )
  {
    const T mean = X.row( r ).mean();
    const auto centered = ( X.row( r ).array() - mean ).matrix();
    const T var = centered.squaredNorm() / static_cast<T>( n );
    inv_std( r ) = T( 1 ) / std::sqrt( var + eps );
    xhat.row( r ) = centered * inv_std( r );
  }
  matrix<T> out = xhat;
  out.array().rowwise() *= g.row( 0 ).array();
  out.rowwise() += b.row( 0 );
  const auto ix = x.id, ig = gain.id, ib = bias.id;
  const bool needs = t.needs_grad( x ) || t.needs_grad( gain ) || t.needs_grad( bias );
  return t.record( std::move( out ), needs,
                   [ix, ig, ib, xhat = std::move( xhat ), inv_std = std::move( inv_std )]( tape<T>& t, std::uint32_t self ) {
                     auto const& G = t.grad( self );
                     if ( t.needs_grad( ig ) )
                     {
                       t.grad( ig ) += G.cwiseProduct( xhat ).colwise().sum();
                     }
                     if ( t.needs_grad( ib ) )
                     {
                       t.grad( ib ) += G.colwise().sum();
                     }
                     if ( t.needs_grad( ix ) )
                     {
                       auto const& g = t.value( ig );
                       matrix<T> dxhat = G;
                       dxhat.array().rowwise() *= g.row( 0 ).array();
                       const auto n = static_cast<T>( G.cols() );
                       auto& dx = t.grad( ix );
                       for ( Eigen::Index r = 0; r < G.rows(); ++r )
                       {
                         const T m1 = dxhat.row( r ).sum() / n;
                         const T m2 = dxhat.row( r ).dot( xhat.row( r ) ) / n;
                         dx.row( r ) += inv_std( r ) * ( dxhat.row( r ).array() - m1 - xhat.row( r ).array() * m2 ).matrix();
                       }
                     }
                   } );
}

template<class T>
var<T> row_softmax( var<T> a )
{
  auto& t = *a.owner;
  auto const& A = t.value( a );
  matrix<T> out( A.rows(), A.cols() );
  for ( Eigen::Index r = 0; r < A.rows(); ++r )
  {
    if ( A.cols() == 0 )
    {
      continue;
    }
    const T m = A.row( r ).maxCoeff();
    out.row( r ) = ( A.row( r ).array() - m ).exp().matrix();
    out.row( r ) /= out.row( r ).sum();
  }
  const auto ia = a.id;
  return t.record( std::move( out ), t.needs_grad( a ), [ia]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    auto const& Y = t.value( self );
    auto& dx = t.grad( ia );
    for ( Eigen::Index r = 0; r < G.rows(); ++r )
    {
      const T s = G.row( r ).dot( Y.row( r ) );
      dx.row( r ) += Y.row( r ).cwiseProduct( ( G.row( r ).array() - s ).matrix() );
    }
  } );
}

/*!
  \brief Per-segment row means.

  Segment `s` covers rows `[offsets[s], offsets[s+1])`; every segment must
  be non-empty. Output has one row per segment.
*/
template<class T>
var<T> segment_mean_rows( var<T> a, std::vector<Eigen::Index> offsets )
{
  auto& t = *a.owner;
  auto const& A = t.value( a );
  if ( offsets.size() < 2 || offsets.front() != 0 || offsets.back() != A.rows() )
  {
    throw shape_error( "segment_mean_rows: offsets must start at 0 and end at the row count " + shape_string( A ) );
  }
  const auto segs = static_cast<Eigen::Index>( offsets.size() - 1 );
  matrix<T> out( segs, A.cols() );
  for ( Eigen::Index s = 0; s < segs; ++s )
  {
    const auto len = offsets[s + 1] - offsets[s];
    if ( len <= 0 )
    {
      throw shape_error( "segment_mean_rows: empty segment " + std::to_string( s ) );
    }
    out.row( s ) = A.middleRows( offsets[s], len ).colwise().sum() / static_cast<T>( len );
  }
  const auto ia = a.id;
  return t.record( std::move( out ), t.needs_grad( a ), [ia, offsets = std::move( offsets )]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    auto& dx = t.grad( ia );
    for ( Eigen::Index s = 0; s + 1 < static_cast<Eigen::Index>( offsets.size() ); ++s )
    {
      const auto len = offsets[s + 1] - offsets[s];
      dx.middleRows( offsets[s], len ).rowwise() += G.row( s ) / static_cast<T>( len );
    }
  } );
}

/*! \brief Mean over all rows, giving a 1 x cols row. */
template<class T>
var<T> mean_pool_rows( var<T> a )
{
  if ( a.rows() == 0 )
  {
    throw shape_error( "mean_pool_rows: no rows to pool" );
  }
  return segment_mean_rows( a, { 0, a.rows() } );
}

template<class T>
var<T> gather_rows( var<T> a, std::vector<std::uint32_t> idx )
{
  auto& t = *a.owner;
  auto const& A = t.value( a );
  matrix<T> out( static_cast<Eigen::Index>( idx.size() ), A.cols() );
  for ( std::size_t i = 0; i < idx.size(); ++i )
  {
    if ( idx[i] >= A.rows() )
    {
      throw shape_error( "gather_rows: index " + std::to_string( idx[i] ) + " out of range for " + shape_string( A ) );
    }
    out.row( static_cast<Eigen::Index>( i ) ) = A.row( idx[i] );
  }
  const auto ia = a.id;
  return t.record( std::move( out ), t.needs_grad( a ), [ia, idx = std::move( idx )]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    auto& dx = t.grad( ia );
    for ( std::size_t i = 0; i < idx.size(); ++i )
    {
      dx.row( idx[i] ) += G.row( static_cast<Eigen::Index>( i ) );
    }
  } );
}

template<class T>
var<T> concat_cols( var<T> a, var<T> b )
{
  detail::check_same_tape( "concat_cols", a, b );
  auto& t = *a.owner;
  auto const& A = t.value( a );
  auto const& B = t.value( b );
  if ( A.rows() != B.rows() )
  {
    detail::shape_fail( "concat_cols", shape_string( A ), shape_string( B ) );
  }
  matrix<T> out( A.rows(), A.cols() + B.cols() );
  out << A, B;
  const auto ia = a.id, ib = b.id;
  const auto ca = A.cols(), cb = B.cols();
  return t.record( std::move( out ), t.needs_grad( a ) || t.needs_grad( b ), [ia, ib, ca, cb]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    if ( t.needs_grad( ia ) )
    {
      t.grad( ia ) += G.leftCols( ca );
    }
    if ( t.needs_grad( ib ) )
    {
      t.grad( ib ) += G.rightCols( cb );
    }
  } );
}

/*! \brief y = S x for a fixed sparse operator S (message passing). */
template<class T>
var<T> propagate( var<T> x, std::shared_ptr<sparse_matrix<T> const> op )
{
  auto const& S = *op;
  auto& t = *x.owner;
  auto const& X = t.value( x );
  if ( S.cols() != X.rows() )
  {
    detail::shape_fail( "propagate", "[" + std::to_string( S.rows() ) + "x" + std::to_string( S.cols() ) + "]", shape_string( X ) );
  }
  matrix<T> out = S * X;
  const auto ix = x.id;
  return t.record( std::move( out ), t.needs_grad( x ), [ix, op = std::move( op )]( tape<T>& t, std::uint32_t self ) {
    t.grad( ix ).noalias() += op->transpose() * t.grad( self );
  } );
}

/*! \brief Replaces the listed rows with a 1 x cols token (the token receives their gradient). */
template<class T>
var<T> replace_rows( var<T> x, std::vector<std::uint32_t> rows, var<T> token )
{
  detail::check_same_tape( "replace_rows", x, token );
  auto& t = *x.owner;
  auto const& X = t.value( x );
  auto const& m = t.value( token );
  if ( m.rows() != 1 || m.cols() != X.cols() )
  {
    detail::shape_fail( "replace_rows", shape_string( X ), shape_string( m ) );
  }
  matrix<T> out = X;
  for ( auto r : rows )
  {
    if ( r >= X.rows() )
    {
      throw shape_error( "replace_rows: row " + std::to_string( r ) + " out of range for " + shape_string( X ) );
    }
    out.row( r ) = m.row( 0 );
  }
  const auto ix = x.id, im = token.id;
  return t.record( std::move( out ), t.needs_grad( x ) || t.needs_grad( token ), [ix, im, rows = std::move( rows )]( tape<T>& t, std::uint32_t self ) {
    auto const& G = t.grad( self );
    if ( t.needs_grad( ix ) )
    {
      matrix<T> pass = G;
      for ( auto r : rows )
      {
        pass.row( r ).setZero();
      }
      t.grad( ix ) += pass;
    }
    if ( t.needs_grad( im ) )
    {
      auto& dm = t.grad( im );
      for ( auto r : rows )
      {
        dm.row( 0 ) += G.row( r );
      }
    }
  } );
}

template<class T>
var<T> sum( var<T> a )
{
  auto& t = *a.owner;
  matrix<T> out( 1, 1 );
  out( 0, 0 ) = t.value( a ).sum();
  const auto ia = a.id;
  return t.record( std::move( out ), t.needs_grad( a ), [ia]( tape<T>& t, std::uint32_t self ) {
    t.grad( ia ).array() += t.grad( self )( 0, 0 );
  } );
}

/*!
  \brief Mean negative log-likelihood over a row subset.

  `probs` holds row distributions, `labels[i]` is the class of row i. The
  result is -(1/|S|) * sum_{i in S} log(max(probs[i][labels[i]], 1e-12)); an
  empty subset gives 0.
*/
template<class T>
var<T> cross_entropy_rows( var<T> probs, std::vector<std::uint32_t> const& labels, std::vector<std::uint32_t> rows )
{
  auto& t = *probs.owner;
  auto const& P = t.value( probs );
  if ( static_cast<Eigen::Index>( labels.size() ) != P.rows() )
  {
    throw shape_error( "cross_entropy_rows: " + std::to_string( labels.size() ) + " labels for " + shape_string( P ) );
  }
  constexpr T floor = T( 1e-12 );
  matrix<T> out( 1, 1 );
  out( 0, 0 ) = T( 0 );
  std::vector<std::pair<std::uint32_t, std::uint32_t>> picks;
  picks.reserve( rows.size() );
  for ( auto r : rows )
  {
    if ( r >= P.rows() || labels[r] >= P.cols() )
    {
      throw shape_error( "cross_entropy_rows: row or label out of range for " + shape_string( P ) );
    }
    picks.emplace_back( r, labels[r] );
    out( 0, 0 ) -= std::log( std::max( P( r, labels[r] ), floor ) );
  }
  const T inv = rows.empty() ? T( 0 ) : T( 1 ) / static_cast<T>( rows.size() );
  out( 0, 0 ) *= inv;
  const auto ip = probs.id;
  return t.record( std::move( out ), t.needs_grad( probs ) && !rows.empty(), [ip, inv, picks = std::move( picks )]( tape<T>& t, std::uint32_t self ) {
    const T g = t.grad( self )( 0, 0 );
    auto const& P = t.value( ip );
    auto& dp = t.grad( ip );
    for ( auto const& [r, c] : picks )
    {
      const T p = P( r, c );
      if ( p > floor )
      {
        dp( r, c ) -= g * inv / p;
      }
    }
  } );
}

/*! \brief (1/|S|) * sum over rows in S and all columns of (pred - target)^2. */
template<class T>
var<T> squared_error( var<T> pred, matrix<T> const& target, std::vector<std::uint32_t> rows )
{
  auto& t = *pred.owner;
  auto const& P = t.value( pred );
  if ( P.rows() != target.rows() || P.cols() != target.cols() )
  {
    detail::shape_fail( "squared_error", shape_string( P ), shape_string( target ) );
  }
  matrix<T> diff = matrix<T>::Zero( P.rows(), P.cols() );
  for ( auto r : rows )
  {
    if ( r >= P.rows() )
    {
      throw shape_error( "squared_error: row out of range for " + shape_string( P ) );
    }
    diff.row( r ) = P.row( r ) - target.row( r );
  }
  const T inv = rows.empty() ? T( 0 ) : T( 1 ) / static_cast<T>( rows.size() );
  matrix<T> out( 1, 1 );
  out( 0, 0 ) = diff.squaredNorm() * inv;
  const auto ip = pred.id;
  return t.record( std::move( out ), t.needs_grad( pred ) && !rows.empty(), [ip, inv, diff = std::move( diff )]( tape<T>& t, std::uint32_t self ) {
    t.grad( ip ) += diff * ( T( 2 ) * inv * t.grad( self )( 0, 0 ) );
  } );
}

/*! \brief Squared error over all rows. */
template<class T>
var<T> squared_error( var<T> pred, matrix<T> const& target )
{
  std::vector<std::uint32_t> rows( static_cast<std::size_t>( pred.rows() ) );
  for ( std::size_t i = 0; i < rows.size(); ++i )
  {
    rows[i] = static_cast<std::uint32_t>( i );
  }
  return squared_error( pred, target, std::move( rows ) );
}

} // namespace mgvga
