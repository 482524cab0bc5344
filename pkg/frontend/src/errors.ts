/** Typed errors mirroring the native error cases one to one. */

export class EvictedIndexError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EvictedIndexError";
  }
}

export class WaitTimeoutError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "WaitTimeoutError";
  }
}

export class ShutdownError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ShutdownError";
  }
}

/** Anything the bridge reports that has no dedicated class. */
export class BridgeError extends Error {
  readonly nativeType: string;
  constructor(nativeType: string, message: string) {
    super(message);
    this.name = "BridgeError";
    this.nativeType = nativeType;
  }
}

export function errorFromBridge(nativeType: string, message: string): Error {
  switch (nativeType) {
    case "EvictedIndexError":
      return new EvictedIndexError(message);
    case "WaitTimeoutError":
      return new WaitTimeoutError(message);
    case "ShutdownError":
      return new ShutdownError(message);
    default:
      return new BridgeError(nativeType, message);
  }
}
