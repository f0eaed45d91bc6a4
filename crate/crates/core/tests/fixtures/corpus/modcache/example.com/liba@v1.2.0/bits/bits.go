package bits

import "unsafe"

type word struct {
	lo, hi uint32
}

func Width() int {
	var w word
	return int(unsafe.Sizeof(w)) + int(unsafe.Offsetof(w.hi)) + int(unsafe.Alignof(w))
}
