// Operator session state machine.
//
// One decision-support pass: load an image, tune the threshold until the
// preview shows the vessel, run the query, review the ranked gallery
// against the target, confirm one candidate. Querying is only possible
// with a non-empty preview, a decision can only reference the current
// ranked list, and a confirmed session is locked. Retrying a failed
// confirmation reuses the same idempotency key so the log can never gain
// a duplicate entry.

import type { QueryResponse, RankedEntry } from './api';
import type { BinaryMask } from './threshold';

export type DecisionStatus = 'none' | 'pending' | 'failed' | 'confirmed';

export interface SessionState {
  imageLoaded: boolean;
  mask: BinaryMask | null;
  maskPixels: number;
  queryRaw: string | null;
  query: QueryResponse | null;
  selectedId: string | null;
  decisionStatus: DecisionStatus;
  decisionKey: string | null;
}

export function newSession(): SessionState {
  return {
    imageLoaded: false,
    mask: null,
    maskPixels: 0,
    queryRaw: null,
    query: null,
    selectedId: null,
    decisionStatus: 'none',
    decisionKey: null,
  };
}

export function canQuery(s: SessionState): boolean {
  return s.imageLoaded && s.mask !== null && s.maskPixels > 0 && s.decisionStatus !== 'confirmed';
}

export function canConfirm(s: SessionState): boolean {
  return (
    s.query !== null &&
    s.selectedId !== null &&
    s.query.entries.some((e) => e.id === s.selectedId) &&
    (s.decisionStatus === 'none' || s.decisionStatus === 'failed')
  );
}

export function setImage(s: SessionState): SessionState {
  // a fresh image invalidates everything downstream
  return { ...newSession(), imageLoaded: true };
}

export function setMask(s: SessionState, mask: BinaryMask, pixels: number): SessionState {
  if (s.decisionStatus === 'confirmed') return s; // session locked
  return { ...s, mask, maskPixels: pixels, query: null, queryRaw: null, selectedId: null };
}

export function setQueryResult(s: SessionState, doc: QueryResponse, raw: string): SessionState {
  return {
    ...s,
    query: doc,
    queryRaw: raw,
    selectedId: null,
    decisionStatus: 'none',
    decisionKey: null,
  };
}

export function selectCandidate(s: SessionState, id: string): SessionState {
  if (!s.query || !s.query.entries.some((e) => e.id === id)) return s;
  if (s.decisionStatus === 'confirmed' || s.decisionStatus === 'pending') return s;
  return { ...s, selectedId: id };
}

export function selectedEntry(s: SessionState): RankedEntry | null {
  if (!s.query || !s.selectedId) return null;
  return s.query.entries.find((e) => e.id === s.selectedId) ?? null;
}

function freshKey(): string {
  if (typeof crypto !== 'undefined' && 'randomUUID' in crypto) {
    return crypto.randomUUID();
  }
  return `k-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

/**
 * Begin a confirmation attempt. The idempotency key is minted once per
 * decision and reused across retries, so a double submission or a retry
 * after a network failure lands in the log exactly once.
 */
export function beginConfirm(s: SessionState): SessionState {
  if (!canConfirm(s)) return s;
  return {
    ...s,
    decisionStatus: 'pending',
    decisionKey: s.decisionKey ?? freshKey(),
  };
}

export function confirmSucceeded(s: SessionState): SessionState {
  return { ...s, decisionStatus: 'confirmed' };
}

export function confirmFailed(s: SessionState): SessionState {
  // keep the key: the retry must not create a second log entry
  return { ...s, decisionStatus: 'failed' };
}
