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
  \file tape.hpp
  \brief Reverse-mode tape over dense row-major matrices

  Every op appends a node holding its forward value and a closure that
  pushes the node's gradient into its inputs. `backward` replays the tape
  in reverse creation order, which is a valid reverse topological order.
  Gradients of parameter leaves are accumulated into `tensor::grad`.
*/

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace mgvga
{

template<class T>
class tape;

/*! \brief Handle to a tape node. */
template<class T>
struct var
{
  tape<T>* owner{ nullptr };
  std::uint32_t id{ 0 };

  matrix<T> const& value() const { return owner->value( *this ); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  T scalar() const { return value()( 0, 0 ); }
};

template<class T>
class tape
{
public:
  using mat = matrix<T>;
  using backward_fn = std::function<void( tape&, std::uint32_t )>;

  tape() = default;
  tape( tape const& ) = delete;
  tape& operator=( tape const& ) = delete;

  var<T> constant( mat value )
  {
    node n;
    n.value = std::move( value );
    return push( std::move( n ) );
  }

  /*! \brief Leaf that reads the parameter in place and accumulates into its grad. */
  var<T> param( tensor<T>& p )
  {
    node n;
    n.external = &p.value;
    n.needs_grad = p.requires_grad;
    n.target = p.requires_grad ? &p : nullptr;
    return push( std::move( n ) );
  }

  var<T> record( mat value, bool needs_grad, backward_fn fn )
  {
    node n;
    n.value = std::move( value );
    n.needs_grad = needs_grad;
    if ( needs_grad )
    {
      n.backward = std::move( fn );
    }
    return push( std::move( n ) );
  }

  mat const& value( var<T> v ) const
  {
    auto const& n = nodes_[v.id];
    return n.external ? *n.external : n.value;
  }
  mat const& value( std::uint32_t id ) const { return value( var<T>{ const_cast<tape*>( this ), id } ); }

  bool needs_grad( var<T> v ) const { return nodes_[v.id].needs_grad; }
  bool needs_grad( std::uint32_t id ) const { return nodes_[id].needs_grad; }

  /*! \brief Gradient buffer of a node, zero-initialized on first access. */
  mat& grad( std::uint32_t id )
  {
    auto& n = nodes_[id];
    if ( !n.has_grad )
    {
      auto const& v = value( id );
      n.grad.setZero( v.rows(), v.cols() );
      n.has_grad = true;
    }
    return n.grad;
  }

  bool has_grad( std::uint32_t id ) const { return nodes_[id].has_grad; }

  /*! \brief Seeds d(root)/d(root) = 1 for a 1x1 root and replays the tape. */
  void backward( var<T> root )
  {
    if ( value( root ).size() != 1 )
    {
      throw shape_error( "backward: root must be 1x1, got " + shape_string( value( root ) ) );
    }
    grad( root.id )( 0, 0 ) += T( 1 );
    for ( std::int64_t i = static_cast<std::int64_t>( root.id ); i >= 0; --i )
    {
      auto& n = nodes_[static_cast<std::size_t>( i )];
      if ( !n.has_grad || !n.needs_grad )
      {
        continue;
      }
      if ( n.backward )
      {
        n.backward( *this, static_cast<std::uint32_t>( i ) );
      }
      else if ( n.target )
      {
        n.target->grad_buffer() += n.grad;
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

  /*! \brief Folds a piecewise-linear decision pattern into the kink signature. */
  void record_kinks( std::uint64_t h ) { kinks_ = ( kinks_ ^ h ) * 0x100000001b3ull + 0x9e3779b97f4a7c15ull; }
  std::uint64_t kink_signature() const { return kinks_; }

private:
  struct node
  {
    mat value;
    mat const* external{ nullptr };
    mat grad;
    bool has_grad{ false };
    bool needs_grad{ false };
    tensor<T>* target{ nullptr };
    backward_fn backward;
  };

  var<T> push( node&& n )
  {
    nodes_.push_back( std::move( n ) );
    return var<T>{ this, static_cast<std::uint32_t>( nodes_.size() - 1 ) };
  }

  std::vector<node> nodes_;
  std::uint64_t kinks_{ 0xcbf29ce484222325ull };
};

} // namespace mgvga
