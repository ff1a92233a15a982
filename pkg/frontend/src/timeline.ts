/** Time-slider state: steps through tags in sorted order, pause keeps place. */

type TimerHandle = ReturnType<typeof setInterval>;

export class Timeline {
  readonly tags: string[];
  private index = 0;
  private handle: TimerHandle | null = null;

  constructor(tags: Iterable<string>) {
    this.tags = [...new Set(tags)].sort();
  }

  get empty(): boolean {
    return this.tags.length === 0;
  }

  get playing(): boolean {
    return this.handle !== null;
  }

  current(): string | null {
    return this.tags.length > 0 ? this.tags[this.index] : null;
  }

  seek(tag: string): string | null {
    const at = this.tags.indexOf(tag);
    if (at >= 0) this.index = at;
    return this.current();
  }

  /** Advance one tag, wrapping at the end. */
  step(): string | null {
    if (this.tags.length === 0) return null;
    this.index = (this.index + 1) % this.tags.length;
    return this.current();
  }

  play(onTick: (tag: string) => void, intervalMs = 600): void {
    if (this.tags.length === 0 || this.handle !== null) return;
    onTick(this.current()!);
    this.handle = setInterval(() => onTick(this.step()!), intervalMs);
  }

  pause(): void {
    if (this.handle !== null) {
      clearInterval(this.handle);
      this.handle = null;
    }
  }
}
