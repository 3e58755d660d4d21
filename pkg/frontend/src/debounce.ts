/** Trailing-edge debounce for the what-if loop: one call per settle. */

export interface Debounced<T extends unknown[]> {
  call(...args: T): void;
  cancel(): void;
  flush(): void;
}

export function debounce<T extends unknown[]>(
  fn: (...args: T) => void,
  waitMs: number,
): Debounced<T> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: T | null = null;

  const fire = () => {
    timer = null;
    if (pending !== null) {
      const args = pending;
      pending = null;
      fn(...args);
    }
  };

  return {
    call(...args: T) {
      pending = args;
      if (timer !== null) {
        clearTimeout(timer);
      }
      timer = setTimeout(fire, waitMs);
    },
    cancel() {
      if (timer !== null) {
        clearTimeout(timer);
        timer = null;
      }
      pending = null;
    },
    flush() {
      if (timer !== null) {
        clearTimeout(timer);
        fire();
      }
    },
  };
}
