import { describe, expect, it } from 'vitest';

import { OfflineError } from '../src/api';
import { OfflineTracker } from '../src/offline';

describe('OfflineTracker', () => {
  it('notifies only on state transitions', () => {
    const tracker = new OfflineTracker();
    const seen: boolean[] = [];
    tracker.subscribe((v) => seen.push(v));

    tracker.noteFailure();
    tracker.noteFailure();
    tracker.noteSuccess();
    tracker.noteSuccess();
    tracker.noteFailure();

    expect(seen).toEqual([true, false, true]);
    expect(tracker.offline).toBe(true);
  });

  it('track flips offline on OfflineError and back on success', async () => {
    const tracker = new OfflineTracker();

    await expect(tracker.track(Promise.reject(new OfflineError(new TypeError('x')))))
      .rejects.toThrow('service unreachable');
    expect(tracker.offline).toBe(true);

    await expect(tracker.track(Promise.resolve(42))).resolves.toBe(42);
    expect(tracker.offline).toBe(false);
  });

  it('track leaves the flag alone for ordinary API errors', async () => {
    const tracker = new OfflineTracker();
    await expect(tracker.track(Promise.reject(new Error('409: already decided'))))
      .rejects.toThrow('already decided');
    expect(tracker.offline).toBe(false);
  });
});
