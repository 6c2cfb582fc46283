export type KeyAction =
  | 'next'
  | 'prev'
  | 'accept'
  | 'reject'
  | 'page-next'
  | 'page-prev'
  | 'tab-queue'
  | 'tab-explore'
  | 'tab-coverage';

export interface KeyInput {
  key: string;
  ctrlKey?: boolean;
  metaKey?: boolean;
  altKey?: boolean;
  inField?: boolean; // focus is in an input/textarea/select
}

// Single place for the bindings so the help line and the handler agree.
export const BINDINGS: Array<[string, KeyAction]> = [
  ['j', 'next'],
  ['ArrowDown', 'next'],
  ['k', 'prev'],
  ['ArrowUp', 'prev'],
  ['a', 'accept'],
  ['x', 'reject'],
  [']', 'page-next'],
  ['[', 'page-prev'],
  ['1', 'tab-queue'],
  ['2', 'tab-explore'],
  ['3', 'tab-coverage'],
];

const TABLE = new Map(BINDINGS);

export function keyAction(input: KeyInput): KeyAction | null {
  if (input.inField) return null;
  if (input.ctrlKey || input.metaKey || input.altKey) return null;
  return TABLE.get(input.key) ?? null;
}
