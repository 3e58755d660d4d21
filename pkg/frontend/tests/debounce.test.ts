import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once with the latest arguments after the wait", () => {
    const calls: number[] = [];
    const debounced = debounce((value: number) => calls.push(value), 250);
    debounced.call(1);
    vi.advanceTimersByTime(100);
    debounced.call(2);
    vi.advanceTimersByTime(100);
    debounced.call(3);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(249);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
    vi.advanceTimersByTime(1000);
    expect(calls).toEqual([3]);
  });

  it("cancel drops the pending call", () => {
    const calls: number[] = [];
    const debounced = debounce((value: number) => calls.push(value), 250);
    debounced.call(1);
    debounced.cancel();
    vi.advanceTimersByTime(1000);
    expect(calls).toEqual([]);
  });

  it("flush fires the pending call immediately", () => {
    const calls: number[] = [];
    const debounced = debounce((value: number) => calls.push(value), 250);
    debounced.call(7);
    debounced.flush();
    expect(calls).toEqual([7]);
    vi.advanceTimersByTime(1000);
    expect(calls).toEqual([7]);
  });
});
