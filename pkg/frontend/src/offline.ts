// Connectivity state for the banner. Any failed request flips to offline;
// the next successful one (including the periodic ping) clears it.
export class OfflineTracker {
  offline = false;
  private listeners: Array<(offline: boolean) => void> = [];

  subscribe(fn: (offline: boolean) => void): void {
    this.listeners.push(fn);
  }

  private set(value: boolean): void {
    if (this.offline === value) return;
    this.offline = value;
    for (const fn of this.listeners) fn(value);
  }

  noteFailure(): void {
    this.set(true);
  }

  noteSuccess(): void {
    this.set(false);
  }

  // wraps a request so connectivity tracking stays in one place
  async track<T>(work: Promise<T>): Promise<T> {
    try {
      const result = await work;
      this.noteSuccess();
      return result;
    } catch (err) {
      if (err instanceof Error && err.name === 'OfflineError') this.noteFailure();
      throw err;
    }
  }
}
